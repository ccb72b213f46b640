//! Convolutional LSTM, run bidirectionally over a short feature sequence.

use alloc::vec::Vec;
use rand::Rng;

use super::conv::Conv2d;
use super::param::{join, Param, Parameters};
use super::sigmoid;
use crate::error::{Error, Result};
use crate::Real;

/// Gates `[i, f, o, g] = conv([x; h])`, `c' = f⊙c + i⊙g`, `h' = o⊙tanh(c')`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLstmCell<T> {
    pub conv: Conv2d<T>,
    pub c_in: usize,
    pub hidden: usize,
}

struct StepCache<T> {
    col: Vec<T>,
    gates: Vec<T>,
    c_prev: Vec<T>,
    tanh_c: Vec<T>,
}

pub struct CellRunCache<T> {
    steps: Vec<StepCache<T>>,
}

impl<T: Real> ConvLstmCell<T> {
    pub fn new<R: Rng + ?Sized>(c_in: usize, hidden: usize, kernel: usize, rng: &mut R) -> Self {
        Self { conv: Conv2d::new(c_in + hidden, 4 * hidden, kernel, rng), c_in, hidden }
    }

    fn step(&self, x: &[T], h: &[T], c: &[T], hh: usize, ww: usize) -> (Vec<T>, Vec<T>, StepCache<T>) {
        let hw = hh * ww;
        let n = self.hidden * hw;
        let mut input = Vec::with_capacity(x.len() + h.len());
        input.extend_from_slice(x);
        input.extend_from_slice(h);
        let (mut gates, col) = self.conv.forward(&input, hh, ww);
        for v in gates[..3 * n].iter_mut() {
            *v = sigmoid(*v);
        }
        for v in gates[3 * n..].iter_mut() {
            *v = v.tanh();
        }
        let (i, f, o, g) = (&gates[..n], &gates[n..2 * n], &gates[2 * n..3 * n], &gates[3 * n..]);
        let mut c_new = Vec::with_capacity(n);
        let mut tanh_c = Vec::with_capacity(n);
        let mut h_new = Vec::with_capacity(n);
        for j in 0..n {
            let cn = f[j] * c[j] + i[j] * g[j];
            let tc = cn.tanh();
            c_new.push(cn);
            tanh_c.push(tc);
            h_new.push(o[j] * tc);
        }
        (h_new, c_new, StepCache { col, gates, c_prev: c.to_vec(), tanh_c })
    }

    fn step_backward(
        &mut self,
        cache: StepCache<T>,
        dh: &[T],
        dc: &mut [T],
        hh: usize,
        ww: usize,
    ) -> (Vec<T>, Vec<T>) {
        let n = self.hidden * hh * ww;
        let one = T::one();
        let g = &cache.gates;
        let mut dz = alloc::vec![T::zero(); 4 * n];
        for j in 0..n {
            let (i, f, o, gg) = (g[j], g[n + j], g[2 * n + j], g[3 * n + j]);
            let tc = cache.tanh_c[j];
            let dcj = dc[j] + dh[j] * o * (one - tc * tc);
            dz[j] = dcj * gg * i * (one - i);
            dz[n + j] = dcj * cache.c_prev[j] * f * (one - f);
            dz[2 * n + j] = dh[j] * tc * o * (one - o);
            dz[3 * n + j] = dcj * i * (one - gg * gg);
            dc[j] = dcj * f;
        }
        let mut dinput = self.conv.backward(&cache.col, &dz, hh, ww, true).expect("dx requested");
        let dh_prev = dinput.split_off(self.c_in * hh * ww);
        (dinput, dh_prev)
    }

    /// Runs the cell over `seq` from zero state; returns the final hidden state.
    pub fn run(&self, seq: &[&[T]], hh: usize, ww: usize) -> (Vec<T>, CellRunCache<T>) {
        let n = self.hidden * hh * ww;
        let mut h = alloc::vec![T::zero(); n];
        let mut c = alloc::vec![T::zero(); n];
        let mut steps = Vec::with_capacity(seq.len());
        for x in seq {
            let (hn, cn, sc) = self.step(x, &h, &c, hh, ww);
            h = hn;
            c = cn;
            steps.push(sc);
        }
        (h, CellRunCache { steps })
    }

    /// Backprop from the final hidden state; returns `dL/dx` per step in sequence order.
    pub fn run_backward(&mut self, cache: CellRunCache<T>, dh_final: Vec<T>, hh: usize, ww: usize) -> Vec<Vec<T>> {
        let n = self.hidden * hh * ww;
        let mut dh = dh_final;
        let mut dc = alloc::vec![T::zero(); n];
        let mut dxs = Vec::with_capacity(cache.steps.len());
        for sc in cache.steps.into_iter().rev() {
            let (dx, dh_prev) = self.step_backward(sc, &dh, &mut dc, hh, ww);
            dxs.push(dx);
            dh = dh_prev;
        }
        dxs.reverse();
        dxs
    }

    pub fn cast<U: Real>(&self) -> ConvLstmCell<U> {
        ConvLstmCell { conv: self.conv.cast(), c_in: self.c_in, hidden: self.hidden }
    }
}

impl<T: Real> Parameters<T> for ConvLstmCell<T> {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Param<T>)) {
        self.conv.visit(prefix, f);
    }
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Param<T>)) {
        self.conv.visit_mut(prefix, f);
    }
}

/// Forward and backward ConvLSTM passes; the two final hidden states are
/// concatenated and projected back to `c_out` channels by a 1×1 conv.
#[derive(Debug, Clone, PartialEq)]
pub struct BiConvLstm<T> {
    pub forward: ConvLstmCell<T>,
    pub backward: ConvLstmCell<T>,
    pub proj: Conv2d<T>,
}

pub struct FuseCache<T> {
    fwd: CellRunCache<T>,
    bwd: CellRunCache<T>,
    proj_col: Vec<T>,
    len: usize,
}

impl<T: Real> BiConvLstm<T> {
    pub fn new<R: Rng + ?Sized>(c_in: usize, hidden: usize, c_out: usize, kernel: usize, rng: &mut R) -> Self {
        Self {
            forward: ConvLstmCell::new(c_in, hidden, kernel, rng),
            backward: ConvLstmCell::new(c_in, hidden, kernel, rng),
            proj: Conv2d::new(2 * hidden, c_out, 1, rng),
        }
    }

    fn check(&self, seq: &[&[T]], hh: usize, ww: usize) -> Result<()> {
        if seq.is_empty() {
            return Err(Error::arg("ConvLSTM fusion needs a non-empty sequence"));
        }
        let n = self.forward.c_in * hh * ww;
        if let Some(bad) = seq.iter().find(|s| s.len() != n) {
            return Err(Error::shape("ConvLSTM sequence element", n, bad.len()));
        }
        Ok(())
    }

    /// `[h_forward ‖ h_backward]` before projection.
    pub fn hidden_states(&self, seq: &[&[T]], hh: usize, ww: usize) -> Result<Vec<T>> {
        self.check(seq, hh, ww)?;
        Ok(self.hidden_cached(seq, hh, ww).0)
    }

    fn hidden_cached(&self, seq: &[&[T]], hh: usize, ww: usize) -> (Vec<T>, CellRunCache<T>, CellRunCache<T>) {
        let (mut hf, cf) = self.forward.run(seq, hh, ww);
        let rev: Vec<&[T]> = seq.iter().rev().copied().collect();
        let (hb, cb) = self.backward.run(&rev, hh, ww);
        hf.extend_from_slice(&hb);
        (hf, cf, cb)
    }

    pub fn fuse(&self, seq: &[&[T]], hh: usize, ww: usize) -> Result<(Vec<T>, FuseCache<T>)> {
        self.check(seq, hh, ww)?;
        let (cat, fwd, bwd) = self.hidden_cached(seq, hh, ww);
        let (out, proj_col) = self.proj.forward(&cat, hh, ww);
        Ok((out, FuseCache { fwd, bwd, proj_col, len: seq.len() }))
    }

    /// Returns `dL/d seq[i]` for every sequence element.
    pub fn fuse_backward(&mut self, cache: FuseCache<T>, dout: &[T], hh: usize, ww: usize) -> Vec<Vec<T>> {
        let mut dcat = self.proj.backward(&cache.proj_col, dout, hh, ww, true).expect("dx requested");
        let dhb = dcat.split_off(self.forward.hidden * hh * ww);
        let mut dseq = self.forward.run_backward(cache.fwd, dcat, hh, ww);
        let dseq_b = self.backward.run_backward(cache.bwd, dhb, hh, ww);
        debug_assert_eq!(dseq.len(), cache.len);
        for (d, db) in dseq.iter_mut().zip(dseq_b.iter().rev()) {
            for (a, b) in d.iter_mut().zip(db) {
                *a += *b;
            }
        }
        dseq
    }

    pub fn cast<U: Real>(&self) -> BiConvLstm<U> {
        BiConvLstm { forward: self.forward.cast(), backward: self.backward.cast(), proj: self.proj.cast() }
    }
}

impl<T: Real> Parameters<T> for BiConvLstm<T> {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Param<T>)) {
        self.forward.visit(&join(prefix, "forward"), f);
        self.backward.visit(&join(prefix, "backward"), f);
        self.proj.visit(&join(prefix, "proj"), f);
    }
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Param<T>)) {
        self.forward.visit_mut(&join(prefix, "forward"), f);
        self.backward.visit_mut(&join(prefix, "backward"), f);
        self.proj.visit_mut(&join(prefix, "proj"), f);
    }
}
