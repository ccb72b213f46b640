use alloc::vec::Vec;

/// Sequential map for magnitudes, dark purple through teal to yellow.
pub const MAGNITUDE_ANCHORS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

/// Zero is white; larger errors run through orange to dark red.
pub const ERROR_ANCHORS: [[u8; 3]; 5] = [[255, 255, 255], [254, 224, 144], [253, 174, 97], [215, 48, 39], [103, 0, 13]];

/// A 256-entry lookup table built by linear interpolation between anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Colormap {
    lut: Vec<[u8; 3]>,
}

impl Colormap {
    pub fn from_anchors(anchors: &[[u8; 3]]) -> Self {
        assert!(anchors.len() >= 2, "colormap needs two anchors");
        let segs = (anchors.len() - 1) as f64;
        let lut = (0..256)
            .map(|i| {
                let pos = i as f64 / 255.0 * segs;
                let k = (pos as usize).min(anchors.len() - 2);
                let f = pos - k as f64;
                let mut rgb = [0u8; 3];
                for (c, v) in rgb.iter_mut().enumerate() {
                    let a = anchors[k][c] as f64;
                    let b = anchors[k + 1][c] as f64;
                    *v = libm::round(a + (b - a) * f) as u8;
                }
                rgb
            })
            .collect();
        Self { lut }
    }

    pub fn magnitude() -> Self {
        Self::from_anchors(&MAGNITUDE_ANCHORS)
    }

    pub fn error() -> Self {
        Self::from_anchors(&ERROR_ANCHORS)
    }

    /// Color of `v` on the scale `[lo, hi]`; a degenerate scale maps to the
    /// lowest color.
    pub fn color(&self, v: f64, lo: f64, hi: f64) -> [u8; 3] {
        let u = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        self.lut[libm::round(u * 255.0) as usize]
    }

    pub fn lowest(&self) -> [u8; 3] {
        self.lut[0]
    }

    pub fn highest(&self) -> [u8; 3] {
        self.lut[255]
    }
}
