//! Discrete Kähler geometry on the flat complex torus.
//!
//! The torus `C^n / Z^{2n}` carries the flat form `ω` with `g_{ij̄} = δ_ij`.
//! A periodic potential is sampled on a uniform grid with axes ordered
//! `(x_1, y_1, …, x_n, y_n)`, last axis fastest. All derivatives are
//! Fourier-spectral, with `∂/∂z = ½(∂/∂x − i∂/∂y)`; the Nyquist mode is
//! dropped from every first-order symbol so mixed and pure second
//! derivatives are consistent compositions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{CurvatureFields, Geometry, GeometryState, Potential, RicciPotential, TestbedKind};
use crate::herm;

/// Default cap on `N^{2n}`.
pub const DEFAULT_MAX_NODES: usize = 1 << 22;

/// Smallest metric eigenvalue accepted at any node.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-8;

/// Uniform periodic grid on the unit-period torus of complex dimension `n`.
#[derive(Clone)]
pub struct TorusGrid {
    n: usize,
    nodes_per_axis: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid").field("n", &self.n).field("nodes_per_axis", &self.nodes_per_axis).finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.nodes_per_axis == other.nodes_per_axis
    }
}

impl TorusGrid {
    pub fn new(n: usize, nodes_per_axis: usize) -> Result<Self> {
        Self::with_budget(n, nodes_per_axis, DEFAULT_MAX_NODES)
    }

    pub fn with_budget(n: usize, nodes_per_axis: usize, max_nodes: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Domain(format!("torus dimension n = {n} outside 1..=3")));
        }
        if !nodes_per_axis.is_multiple_of(2) || !(8..=256).contains(&nodes_per_axis) {
            return Err(Error::Domain(format!("nodes per axis N = {nodes_per_axis} must be even and within 8..=256")));
        }
        let nodes = (nodes_per_axis as u128).pow(2 * n as u32);
        if nodes > max_nodes as u128 {
            return Err(Error::Budget { nodes: nodes.min(usize::MAX as u128) as usize, budget: max_nodes });
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            nodes_per_axis,
            forward: planner.plan_fft_forward(nodes_per_axis),
            inverse: planner.plan_fft_inverse(nodes_per_axis),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn axes(&self) -> usize {
        2 * self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes_per_axis.pow(self.axes() as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        1.0 / self.num_nodes() as f64
    }

    /// Grid coordinates in `[0,1)` of a node, axes `(x_1, y_1, …)`.
    pub fn coords(&self, node: usize) -> Vec<f64> {
        let nn = self.nodes_per_axis;
        let mut c = vec![0.0; self.axes()];
        let mut r = node;
        for a in (0..self.axes()).rev() {
            c[a] = (r % nn) as f64 / nn as f64;
            r /= nn;
        }
        c
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
        (0..self.num_nodes()).into_par_iter().map(|i| f(&self.coords(i))).collect()
    }

    fn wavenumber(&self, m: usize) -> f64 {
        let nn = self.nodes_per_axis;
        if m < nn / 2 {
            m as f64
        } else if m == nn / 2 {
            0.0
        } else {
            m as f64 - nn as f64
        }
    }

    /// Multi-dimensional FFT in place; the inverse is normalized.
    fn transform(&self, data: &mut [C], inverse: bool) {
        const TILE: usize = 16;
        let nn = self.nodes_per_axis;
        let d = self.axes();
        let plan = if inverse { &self.inverse } else { &self.forward };
        let zero = C::new(0.0, 0.0);
        let scratch_len = plan.get_inplace_scratch_len();
        for a in 0..d {
            let stride = nn.pow((d - 1 - a) as u32);
            if stride == 1 {
                data.par_chunks_mut(nn * 256).for_each(|chunk| {
                    let mut scratch = vec![zero; scratch_len];
                    plan.process_with_scratch(chunk, &mut scratch);
                });
                continue;
            }
            // Gather TILE neighbouring lines at a time so reads stay contiguous.
            let block = nn * stride;
            let tiles_per_block = stride.div_ceil(TILE);
            let src: &[C] = data;
            let tiles: Vec<Vec<C>> = (0..(src.len() / block) * tiles_per_block)
                .into_par_iter()
                .map_init(
                    || vec![zero; scratch_len],
                    |scratch, t| {
                        let base = (t / tiles_per_block) * block;
                        let i0 = (t % tiles_per_block) * TILE;
                        let w = TILE.min(stride - i0);
                        let mut tile = vec![zero; w * nn];
                        for m in 0..nn {
                            let row = &src[base + m * stride + i0..base + m * stride + i0 + w];
                            for (c, v) in row.iter().enumerate() {
                                tile[c * nn + m] = *v;
                            }
                        }
                        plan.process_with_scratch(&mut tile, scratch);
                        tile
                    },
                )
                .collect();
            for (t, tile) in tiles.iter().enumerate() {
                let base = (t / tiles_per_block) * block;
                let i0 = (t % tiles_per_block) * TILE;
                let w = tile.len() / nn;
                for m in 0..nn {
                    let row = &mut data[base + m * stride + i0..base + m * stride + i0 + w];
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = tile[c * nn + m];
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / data.len() as f64;
            data.par_iter_mut().for_each(|v| *v *= scale);
        }
    }

    fn fft_real(&self, f: &[f64]) -> Vec<C> {
        let mut data: Vec<C> = f.iter().map(|&v| C::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// `(Z, Z̄)` symbols of `∂_z` and `∂_z̄` for one complex coordinate,
    /// indexed by `k_x·N + k_y` in FFT order.
    fn pair_symbols(&self) -> Vec<(C, C)> {
        let nn = self.nodes_per_axis;
        (0..nn * nn)
            .map(|p| {
                let (kx, ky) = (self.wavenumber(p / nn), self.wavenumber(p % nn));
                (C::new(PI * ky, PI * kx), C::new(-PI * ky, PI * kx))
            })
            .collect()
    }

    /// Inverse transform of `fhat · σ(Z, Z̄)` for a symbol built from the
    /// per-coordinate `(Z_j, Z̄_j)`.
    fn apply_symbol(&self, fhat: &[C], table: &[(C, C)], symbol: impl Fn(&[(C, C); herm::MAXN]) -> C + Sync) -> Vec<C> {
        let n = self.n;
        let nn2 = self.nodes_per_axis * self.nodes_per_axis;
        let zero = C::new(0.0, 0.0);
        let mut buf = vec![zero; fhat.len()];
        // The last coordinate varies fastest; the others are fixed per chunk.
        buf.par_chunks_mut(nn2).zip(fhat.par_chunks(nn2)).enumerate().for_each(|(c, (out, inp))| {
            let mut sym = [(zero, zero); herm::MAXN];
            let mut r = c;
            for j in (0..n - 1).rev() {
                sym[j] = table[r % nn2];
                r /= nn2;
            }
            for (p, (o, v)) in out.iter_mut().zip(inp).enumerate() {
                sym[n - 1] = table[p];
                *o = v * symbol(&sym);
            }
        });
        self.transform(&mut buf, true);
        buf
    }

    /// Complex Hessian `∂_i∂_j̄ f` from the spectrum of `f`.
    fn hessian(&self, fhat: &[C]) -> Hessian {
        let n = self.n;
        let table = self.pair_symbols();
        let mut diag = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            // Two real diagonal entries share one complex inverse transform.
            let j = if i + 1 < n { Some(i + 1) } else { None };
            let buf = self.apply_symbol(fhat, &table, |s| {
                let a = s[i].0 * s[i].1;
                let b = j.map_or(C::new(0.0, 0.0), |j| s[j].0 * s[j].1);
                a + C::new(0.0, 1.0) * b
            });
            diag.push(buf.iter().map(|c| c.re).collect::<Vec<f64>>());
            if j.is_some() {
                diag.push(buf.iter().map(|c| c.im).collect::<Vec<f64>>());
            }
            i += 2;
        }
        let mut off = Vec::new();
        for (i, j) in upper_pairs(n) {
            off.push(self.apply_symbol(fhat, &table, |s| s[i].0 * s[j].1));
        }
        Hessian { n, diag, off }
    }

    /// `g^{ij̄} ∂_i∂_j̄ f` given the per-node inverse metric.
    fn contract(&self, ginv: &[C], hess: &Hessian) -> Vec<f64> {
        let n = self.n;
        (0..self.num_nodes())
            .into_par_iter()
            .map(|p| {
                let gi = &ginv[p * n * n..(p + 1) * n * n];
                let mut s = 0.0;
                for i in 0..n {
                    s += gi[i * n + i].re * hess.diag[i][p];
                }
                let mut q = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        s += 2.0 * (gi[j * n + i] * hess.off[q][p]).re;
                        q += 1;
                    }
                }
                s
            })
            .collect()
    }

    /// Derived geometry of `ω_φ = ω + i∂∂̄φ`.
    pub fn build_state(&self, phi: &PotentialField) -> Result<MetricState> {
        let n = self.n;
        let nn = n * n;
        let nodes = self.num_nodes();
        check_len(nodes, phi.values.len())?;
        let zero = C::new(0.0, 0.0);
        let hphi = self.hessian(&self.fft_real(&phi.values));

        // Pass 1: metric, admissibility, log det and inverse from one Cholesky.
        let mut metric = vec![zero; nodes * nn];
        let mut ginv = vec![zero; nodes * nn];
        let mut linv = vec![zero; nodes * nn];
        let mut logdet = vec![0.0; nodes];
        let mut min_eig = vec![0.0; nodes];
        metric
            .par_chunks_mut(nn)
            .zip(ginv.par_chunks_mut(nn).zip(linv.par_chunks_mut(nn)))
            .zip(logdet.par_iter_mut().zip(min_eig.par_iter_mut()))
            .enumerate()
            .for_each(|(p, ((gs, (gi, lis)), (ld, me)))| {
                let g = hphi.at(p, 1.0);
                herm::write_slice(&g, n, gs);
                *me = herm::min_eigenvalue(&g, n);
                match herm::cholesky(&g, n) {
                    Some(l) => {
                        *ld = (0..n).map(|i| 2.0 * l[i][i].re.ln()).sum();
                        let li = herm::lower_inverse(&l, n);
                        herm::write_slice(&li, n, lis);
                        herm::write_slice(&herm::mul(&herm::adjoint(&li, n), &li, n), n, gi);
                    }
                    None => {
                        *ld = f64::NAN;
                        *me = me.min(0.0);
                    }
                }
            });
        drop(hphi);
        let (worst, node) = crate::geometry::argmin(min_eig.iter().copied());
        if !(worst >= ADMISSIBILITY_MARGIN) {
            return Err(Error::Admissibility { node, min_eig: worst });
        }
        drop(min_eig);
        let det: Vec<f64> = logdet.par_iter().map(|l| l.exp()).collect();

        // Pass 2: Ric = −∂∂̄ log det g, its spectrum relative to g (whitened
        // through the Cholesky factor) and the σ_k.
        let hlog = self.hessian(&self.fft_real(&logdet));
        drop(logdet);
        let mut ricci = vec![zero; nodes * nn];
        let mut spectra = vec![0.0; nodes * n];
        let mut sig = vec![0.0; nodes * (n + 1)];
        ricci.par_chunks_mut(nn).zip(spectra.par_chunks_mut(n)).zip(sig.par_chunks_mut(n + 1)).enumerate().for_each(
            |(p, ((rs, sp), sg))| {
                let r = hlog.at(p, 0.0);
                let mut neg = herm::zero();
                for i in 0..n {
                    for j in 0..n {
                        neg[i][j] = -r[i][j];
                    }
                }
                herm::write_slice(&neg, n, rs);
                let li = herm::from_slice(&linv[p * nn..(p + 1) * nn], n);
                let a = herm::mul(&herm::mul(&li, &neg, n), &herm::adjoint(&li, n), n);
                let ev = herm::eigenvalues(&a, n);
                sp.copy_from_slice(&ev[..n]);
                sg.fill(0.0);
                sg[0] = 1.0;
                for (i, &v) in ev[..n].iter().enumerate() {
                    for j in (1..=i + 1).rev() {
                        sg[j] += v * sg[j - 1];
                    }
                }
            },
        );
        drop(hlog);
        drop(linv);

        let sigma: Vec<Vec<f64>> = (0..=n).map(|k| sig.iter().skip(k).step_by(n + 1).copied().collect()).collect();
        drop(sig);
        let mut lap_sigma = vec![vec![0.0; nodes]];
        for row in sigma.iter().skip(1) {
            lap_sigma.push(self.contract(&ginv, &self.hessian(&self.fft_real(row))));
        }
        let cell = self.cell_volume();
        let weights = det.iter().map(|d| d * cell).collect();
        let fields = CurvatureFields::new(n, weights, spectra, sigma, lap_sigma)?;
        Ok(MetricState { grid: self.clone(), metric, ginv, det, ricci, fields })
    }

    /// `Δ_φ f = g^{ij̄} ∂_i∂_j̄ f` on the geometry of `state`.
    pub fn laplacian(&self, state: &MetricState, f: &[f64]) -> Result<Vec<f64>> {
        if state.grid != *self {
            return Err(Error::Domain("state was built on a different grid".into()));
        }
        check_len(self.num_nodes(), f.len())?;
        Ok(self.contract(&state.ginv, &self.hessian(&self.fft_real(f))))
    }

    /// `∫ h ω_φ^n`.
    pub fn integrate(&self, state: &MetricState, h: &[f64]) -> Result<f64> {
        check_len(self.num_nodes(), h.len())?;
        Ok(state.fields.integrate(h))
    }

    /// Smallest eigenvalue of `i∂∂̄φ` over all nodes; `ω_{tφ}` stays
    /// admissible for `0 ≤ t < −1/min` when the minimum is negative.
    pub fn min_hessian_eigenvalue(&self, phi: &[f64]) -> Result<f64> {
        check_len(self.num_nodes(), phi.len())?;
        let h = self.hessian(&self.fft_real(phi));
        Ok((0..self.num_nodes())
            .into_par_iter()
            .map(|p| herm::min_eigenvalue(&h.at(p, 0.0), self.n))
            .reduce(|| f64::INFINITY, f64::min))
    }

    /// Real Fourier modes `cos/sin(2π k·x)` with `|k_a| ≤ degree`, constant first.
    pub fn fourier_basis(&self, degree: usize) -> Vec<PotentialField> {
        let d = self.axes();
        let side = 2 * degree + 1;
        let mut basis = vec![PotentialField::raw(vec![1.0; self.num_nodes()])];
        for code in 0..side.pow(d as u32) {
            let mut k = vec![0i64; d];
            let mut r = code;
            for a in (0..d).rev() {
                k[a] = (r % side) as i64 - degree as i64;
                r /= side;
            }
            // One representative per ±k pair: first nonzero component positive.
            match k.iter().find(|&&v| v != 0) {
                Some(&v) if v > 0 => {}
                _ => continue,
            }
            let phase = |x: &[f64]| 2.0 * PI * k.iter().zip(x).map(|(&ka, &xa)| ka as f64 * xa).sum::<f64>();
            basis.push(PotentialField::raw(self.sample(|x| phase(x).cos())));
            basis.push(PotentialField::raw(self.sample(|x| phase(x).sin())));
        }
        basis
    }
}

fn upper_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

struct Hessian {
    n: usize,
    diag: Vec<Vec<f64>>,
    off: Vec<Vec<C>>,
}

impl Hessian {
    /// `shift·I + H` at node `p`.
    fn at(&self, p: usize, shift: f64) -> herm::Mat {
        let mut m = herm::zero();
        for i in 0..self.n {
            m[i][i] = C::new(shift + self.diag[i][p], 0.0);
        }
        for (q, (i, j)) in upper_pairs(self.n).enumerate() {
            m[i][j] = self.off[q][p];
            m[j][i] = self.off[q][p].conj();
        }
        m
    }
}

/// A periodic Kähler potential sampled on a [`TorusGrid`], kept mean-zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    pub values: Vec<f64>,
    /// The constant removed by normalization.
    pub mean: f64,
}

impl PotentialField {
    /// Normalizes `values` to mean zero, remembering the removed constant.
    pub fn new(values: Vec<f64>) -> Self {
        let mut p = Self::raw(values);
        p.normalize();
        p
    }

    pub(crate) fn raw(values: Vec<f64>) -> Self {
        Self { values, mean: 0.0 }
    }

    pub fn zero(grid: &TorusGrid) -> Self {
        Self::raw(vec![0.0; grid.num_nodes()])
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> f64 + Sync) -> Self {
        Self::new(grid.sample(f))
    }

    pub fn normalize(&mut self) {
        let m = self.values.iter().sum::<f64>() / self.values.len() as f64;
        self.values.iter_mut().for_each(|v| *v -= m);
        self.mean += m;
    }
}

impl Potential for PotentialField {
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        let values = x.values.iter().zip(&y.values).map(|(p, q)| a * p + b * q).collect();
        Self { values, mean: a * x.mean + b * y.mean }
    }
}

/// Geometry of `ω_φ` at every node of a torus grid.
#[derive(Debug, Clone)]
pub struct MetricState {
    grid: TorusGrid,
    metric: Vec<C>,
    ginv: Vec<C>,
    det: Vec<f64>,
    ricci: Vec<C>,
    fields: CurvatureFields,
}

impl MetricState {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// `g_{ij̄}` at a node, row-major `n × n`.
    pub fn metric(&self, node: usize) -> &[C] {
        let n = self.grid.n;
        &self.metric[node * n * n..(node + 1) * n * n]
    }

    pub fn ricci(&self, node: usize) -> &[C] {
        let n = self.grid.n;
        &self.ricci[node * n * n..(node + 1) * n * n]
    }

    pub fn det_g(&self) -> &[f64] {
        &self.det
    }

    pub fn volume(&self) -> f64 {
        self.fields.volume()
    }
}

impl GeometryState for MetricState {
    fn testbed(&self) -> TestbedKind {
        TestbedKind::Torus
    }

    fn fields(&self) -> &CurvatureFields {
        &self.fields
    }

    fn ricci_potential(&self) -> Option<RicciPotential<'_>> {
        None
    }
}

impl Geometry for TorusGrid {
    type Potential = PotentialField;
    type State = MetricState;

    fn testbed(&self) -> TestbedKind {
        TestbedKind::Torus
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn num_nodes(&self) -> usize {
        TorusGrid::num_nodes(self)
    }

    fn zero_potential(&self) -> PotentialField {
        PotentialField::zero(self)
    }

    fn build(&self, phi: &PotentialField) -> Result<MetricState> {
        self.build_state(phi)
    }

    fn laplacian_of(&self, state: &MetricState, h: &PotentialField) -> Result<Vec<f64>> {
        self.laplacian(state, &h.values)
    }

    fn nodal_values(&self, phi: &PotentialField) -> Vec<f64> {
        phi.values.clone()
    }

    fn normalize(&self, phi: &mut PotentialField) {
        phi.normalize();
    }

    fn flow_basis(&self, degree: usize) -> Vec<PotentialField> {
        self.fourier_basis(degree)
    }
}
