use ffeinr::archive::{overhead, read_sections, TAG_CKPT, TAG_LOWRES, TAG_META};
use ffeinr::core::train::train_one_stage;
use ffeinr::core::{downsample, gen_taylor_green, EncoderConfig, Extents, FlowField, ModelConfig, TrainConfig};
use ffeinr::{ckpt, raw, Archive, ArchiveMeta, FfError};

fn tiny_cfg() -> TrainConfig {
    TrainConfig {
        iters: 2,
        batch: 2,
        patch: 4,
        queries_per_sample: 16,
        model: ModelConfig {
            encoder: EncoderConfig { c_f: 4, n_blocks: 1, lstm_hidden: 4, kernel: 3 },
            spatial_width: 8,
            spatial_depth: 1,
            temporal_width: 8,
            temporal_depth: 1,
            decoder_width: 8,
            decoder_depth: 1,
            ..ModelConfig::default()
        },
        ..TrainConfig::default()
    }
}

#[test]
fn ffnr_header_layout() {
    let f = FlowField::from_values(
        [3, 4, 5, 2],
        vec![0.0; 120],
        Extents::new(-1.0, 2.0, 0.5, 4.0),
        0.25,
    )
    .unwrap();
    let h = raw::header_bytes(&f).unwrap();
    let mut expect = b"FFNR".to_vec();
    for v in [1u32, 3, 4, 5, 2] {
        expect.extend(v.to_le_bytes());
    }
    for v in [-1.0f64, 2.0, 0.5, 4.0, 0.25] {
        expect.extend(v.to_le_bytes());
    }
    assert_eq!(h, expect);
    assert_eq!(h.len(), raw::HEADER_LEN);
    let bytes = raw::to_bytes(&f).unwrap();
    assert_eq!(bytes.len(), 64 + 120 * 4 + "u_x\0u_y\0".len());
    assert!(bytes.ends_with(b"u_x\0u_y\0"));
}

#[test]
fn ffnr_small_file_and_round_trip() {
    let mut bytes = b"FFNR".to_vec();
    for v in [1u32, 2, 2, 2, 1] {
        bytes.extend(v.to_le_bytes());
    }
    for v in [0.0f64, 1.0, 0.0, 1.0, 1.0] {
        bytes.extend(v.to_le_bytes());
    }
    for i in 0..8 {
        bytes.extend((i as f32 * 0.5).to_le_bytes());
    }
    bytes.extend(b"p\0");
    let f = raw::from_bytes(&bytes).unwrap();
    assert_eq!(f.dims(), [2, 2, 2, 1]);
    assert_eq!(f.get(1, 0, 1, 0), 2.5);
    assert_eq!(f.channel_names(), ["p"]);
    assert_eq!(raw::to_bytes(&f).unwrap(), bytes);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.ffnr");
    std::fs::write(&p, &bytes).unwrap();
    raw::save_raw(&raw::load_raw(&p).unwrap(), &p).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), bytes);
}

#[test]
fn ffnr_rejects_bad_input() {
    let f = gen_taylor_green(8, 2, 0.1).unwrap();
    let bytes = raw::to_bytes(&f).unwrap();
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(raw::from_bytes(&bad), Err(FfError::Format(_))));
    assert!(matches!(raw::from_bytes(&bytes[..200]), Err(FfError::Truncated { .. })));
    let mut nan = bytes.clone();
    nan[64..68].copy_from_slice(&f32::NAN.to_le_bytes());
    assert!(matches!(raw::from_bytes(&nan), Err(FfError::Core(_))));
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let high = gen_taylor_green(17, 9, 0.1).unwrap();
    let mut cfg = tiny_cfg();
    cfg.lr = 3.7e-4;
    let low = downsample(&high, cfg.sx, cfg.st).unwrap();
    let ck = train_one_stage(&low, &high, &cfg).unwrap();
    let bytes = ckpt::to_bytes(&ck).unwrap();
    let back = ckpt::from_bytes(&bytes).unwrap();
    assert_eq!(back, ck);
    assert_eq!(ckpt::to_bytes(&back).unwrap(), bytes);

    let (text, tensors) = ckpt::read_container(&bytes).unwrap();
    assert!(text.contains("norm_offset = "));
    assert!(tensors.iter().any(|t| t.name == "spatial.0.weight" && t.dims.len() == 2));

    let mut cut = bytes.clone();
    cut.truncate(bytes.len() - 3);
    assert!(ckpt::from_bytes(&cut).is_err());
}

#[test]
fn archive_round_trip_accounting_and_crc() {
    let high = gen_taylor_green(17, 9, 0.1).unwrap();
    let cfg = tiny_cfg();
    let a = ffeinr::compress(&high, &cfg, &mut |_, _| {}).unwrap();
    assert_eq!(a.meta, ArchiveMeta { factors: (4, 2), original_dims: [9, 17, 17, 2], iterations: 2, seed: 0 });
    let bytes = a.to_bytes().unwrap();
    let back = Archive::from_bytes(&bytes).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.to_bytes().unwrap(), bytes);

    let secs = read_sections(&bytes).unwrap();
    assert_eq!(secs.iter().map(|s| s.tag).collect::<Vec<_>>(), [TAG_LOWRES, TAG_CKPT, TAG_META]);
    assert_eq!(secs[0].data, raw::to_bytes(&a.low).unwrap());

    let r = ffeinr::compression_rate(&a, &high).unwrap();
    assert_eq!(r.archive_bytes, bytes.len());
    assert_eq!(r.header_bytes + r.lowres_bytes + r.model_bytes + r.meta_bytes, bytes.len());
    assert_eq!(r.header_bytes, overhead(3));
    assert_eq!(r.original_bytes, 9 * 17 * 17 * 2 * 4);
    assert!((r.ratio - r.original_bytes as f64 / bytes.len() as f64).abs() < 1e-15);

    for at in [overhead(3) + 10, bytes.len() - 2] {
        let mut bad = bytes.clone();
        bad[at] ^= 0x40;
        assert!(matches!(Archive::from_bytes(&bad), Err(FfError::Checksum { .. })));
    }
}

#[test]
fn decompress_shapes() {
    let high = gen_taylor_green(17, 9, 0.1).unwrap();
    let a = ffeinr::compress(&high, &tiny_cfg(), &mut |_, _| {}).unwrap();
    for dims in [(5, 5, 5), (9, 17, 17), (33, 17, 17), (7, 11, 6)] {
        let out = ffeinr::decompress(&a, dims).unwrap();
        assert_eq!(out.dims(), [dims.0, dims.1, dims.2, 2]);
        assert!(out.values().iter().all(|v| v.is_finite()));
    }
    assert!(ffeinr::decompress(&a, (4, 5, 5)).is_err());
}
