//! Dirichlet-Laplacian eigenpairs on intervals and rectangles, sensor sets,
//! and the low-frequency observability constant on a sensor.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// Shape of the spatial domain, in unscaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
}

/// Domain (0, kL) or (0, kLx)×(0, kLy) for a spatial scale k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    scale: f64,
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{v} must be positive")))
    }
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self> {
        positive("length", length)?;
        Ok(Domain {
            kind: DomainKind::Interval { length },
            scale: 1.0,
        })
    }

    pub fn rectangle(lx: f64, ly: f64) -> Result<Self> {
        positive("lx", lx)?;
        positive("ly", ly)?;
        Ok(Domain {
            kind: DomainKind::Rectangle { lx, ly },
            scale: 1.0,
        })
    }

    /// The same shape stretched by `k`.
    pub fn scaled(self, k: f64) -> Result<Self> {
        positive("scale", k)?;
        Ok(Domain {
            kind: self.kind,
            scale: self.scale * k,
        })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            DomainKind::Interval { .. } => 1,
            DomainKind::Rectangle { .. } => 2,
        }
    }

    /// Unscaled side lengths.
    fn base_lengths(&self) -> Vec<f64> {
        match self.kind {
            DomainKind::Interval { length } => vec![length],
            DomainKind::Rectangle { lx, ly } => vec![lx, ly],
        }
    }

    /// Physical side lengths kL.
    pub fn lengths(&self) -> Vec<f64> {
        self.base_lengths().into_iter().map(|l| l * self.scale).collect()
    }

    pub fn measure(&self) -> f64 {
        self.lengths().iter().product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lengths())
                .all(|(&xi, l)| xi.is_finite() && (0.0..=l).contains(&xi))
    }
}

/// One eigenpair, identified by its wave numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub index: usize,
    pub lambda: f64,
    pub wave_numbers: Vec<usize>,
}

fn lambda_of(domain: &Domain, waves: &[usize]) -> f64 {
    let base: f64 = waves
        .iter()
        .zip(domain.base_lengths())
        .map(|(&n, l)| {
            let q = PI * n as f64 / l;
            q * q
        })
        .sum();
    base / (domain.scale * domain.scale)
}

fn lambda_order(a: &Mode, b: &Mode) -> Ordering {
    let tie = 1e-12 * a.lambda.max(b.lambda);
    if (a.lambda - b.lambda).abs() <= tie {
        a.wave_numbers.cmp(&b.wave_numbers)
    } else {
        a.lambda.total_cmp(&b.lambda)
    }
}

/// The `n_modes` smallest Dirichlet eigenpairs, by nondecreasing λ with
/// ties broken lexicographically on the wave numbers.
pub fn build_basis(domain: &Domain, n_modes: usize) -> Result<Vec<Mode>> {
    if n_modes == 0 {
        return Err(Error::invalid("n_modes", "must be at least 1"));
    }
    let mut modes: Vec<Mode> = match domain.kind {
        DomainKind::Interval { .. } => (1..=n_modes)
            .map(|n| Mode {
                index: 0,
                lambda: lambda_of(domain, &[n]),
                wave_numbers: vec![n],
            })
            .collect(),
        DomainKind::Rectangle { .. } => {
            let mut v = Vec::with_capacity(n_modes * n_modes);
            for n1 in 1..=n_modes {
                for n2 in 1..=n_modes {
                    v.push(Mode {
                        index: 0,
                        lambda: lambda_of(domain, &[n1, n2]),
                        wave_numbers: vec![n1, n2],
                    });
                }
            }
            v
        }
    };
    modes.sort_by(lambda_order);
    modes.truncate(n_modes);
    for (i, m) in modes.iter_mut().enumerate() {
        m.index = i;
    }
    Ok(modes)
}

fn sine_factor(n: usize, l: f64, x: f64) -> f64 {
    (2.0 / l).sqrt() * (n as f64 * PI * x / l).sin()
}

/// Normalized eigenfunction value; exactly zero on the boundary.
pub fn eigenfunction_eval(mode: &Mode, domain: &Domain, x: &[f64]) -> Result<f64> {
    if !domain.contains(x) {
        return Err(Error::PointOutsideDomain(x.to_vec()));
    }
    let lengths = domain.lengths();
    let mut v = 1.0;
    for ((&n, &xi), &l) in mode.wave_numbers.iter().zip(x).zip(&lengths) {
        if xi == 0.0 || xi == l {
            return Ok(0.0);
        }
        v *= sine_factor(n, l, xi);
    }
    Ok(v)
}

/// Closed range (lo, hi) along one axis.
pub type Span = (f64, f64);

/// Axis-aligned box [lo, hi] in physical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Finite union of disjoint boxes of positive measure inside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSet {
    domain: Domain,
    pieces: Vec<SensorBox>,
}

impl SensorSet {
    pub fn new(domain: &Domain, pieces: Vec<SensorBox>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("sensor", "no pieces"));
        }
        let d = domain.dimension();
        let lengths = domain.lengths();
        for p in &pieces {
            if p.lo.len() != d || p.hi.len() != d {
                return Err(Error::invalid("sensor", "piece dimension differs from domain"));
            }
            for i in 0..d {
                let (a, b) = (p.lo[i], p.hi[i]);
                if !(a.is_finite() && b.is_finite()) || b <= a {
                    return Err(Error::invalid("sensor", format!("empty extent [{a}, {b}]")));
                }
                if a < 0.0 || b > lengths[i] {
                    return Err(Error::invalid("sensor", format!("[{a}, {b}] leaves the domain")));
                }
            }
        }
        for (i, p) in pieces.iter().enumerate() {
            for q in &pieces[i + 1..] {
                let overlap = (0..d).all(|k| p.lo[k].max(q.lo[k]) < p.hi[k].min(q.hi[k]));
                if overlap {
                    return Err(Error::invalid("sensor", "pieces overlap"));
                }
            }
        }
        Ok(SensorSet {
            domain: *domain,
            pieces,
        })
    }

    /// Union of subintervals of a 1D domain.
    pub fn intervals(domain: &Domain, spans: &[(f64, f64)]) -> Result<Self> {
        let pieces = spans
            .iter()
            .map(|&(a, b)| SensorBox {
                lo: vec![a],
                hi: vec![b],
            })
            .collect();
        Self::new(domain, pieces)
    }

    /// Union of sub-rectangles ((x0, x1), (y0, y1)) of a 2D domain.
    pub fn rectangles(domain: &Domain, rects: &[(Span, Span)]) -> Result<Self> {
        let pieces = rects
            .iter()
            .map(|&((x0, x1), (y0, y1))| SensorBox {
                lo: vec![x0, y0],
                hi: vec![x1, y1],
            })
            .collect();
        Self::new(domain, pieces)
    }

    /// The whole domain.
    pub fn full(domain: &Domain) -> Self {
        SensorSet {
            domain: *domain,
            pieces: vec![SensorBox {
                lo: vec![0.0; domain.dimension()],
                hi: domain.lengths(),
            }],
        }
    }

    pub fn pieces(&self) -> &[SensorBox] {
        &self.pieces
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn measure(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.lo.iter().zip(&p.hi).map(|(a, b)| b - a).product::<f64>())
            .sum()
    }
}

/// Coefficients ⟨·, e_n⟩ in an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        SpectralField { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        SpectralField {
            coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        SpectralField {
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// The basis vector e_m in an n-mode space.
    pub fn unit(n: usize, m: usize) -> Self {
        let mut f = Self::zeros(n);
        f.coeffs[m] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn basis_size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// L² norm, equal to the Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        SpectralField {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        if self.basis_size() != other.basis_size() {
            return Err(Error::invalid("field", "basis sizes differ"));
        }
        Ok(SpectralField {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }
}

/// ∫_a^b (2/L) sin(mπx/L) sin(nπx/L) dx.
fn sine_product_integral(m: usize, n: usize, l: f64, a: f64, b: f64) -> f64 {
    let k = PI / l;
    if m == n {
        let w = 2.0 * n as f64 * k;
        ((b - a) - ((w * b).sin() - (w * a).sin()) / w) / l
    } else {
        let d = (m as f64 - n as f64) * k;
        let s = (m + n) as f64 * k;
        (((d * b).sin() - (d * a).sin()) / d - ((s * b).sin() - (s * a).sin()) / s) / l
    }
}

fn check_sensor(domain: &Domain, sensor: &SensorSet) -> Result<()> {
    if sensor.domain != *domain {
        return Err(Error::invalid("sensor", "built for a different domain"));
    }
    Ok(())
}

/// Gram matrix M_{mn} = ∫_{G₀} e_m e_n in closed form.
pub fn sensor_gram(basis: &[Mode], domain: &Domain, sensor: &SensorSet) -> Result<DMatrix<f64>> {
    check_sensor(domain, sensor)?;
    let n = basis.len();
    let lengths = domain.lengths();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for p in &sensor.pieces {
                let mut prod = 1.0;
                for (axis, &l) in lengths.iter().enumerate() {
                    prod *= sine_product_integral(
                        basis[i].wave_numbers[axis],
                        basis[j].wave_numbers[axis],
                        l,
                        p.lo[axis],
                        p.hi[axis],
                    );
                }
                acc += prod;
            }
            g[(i, j)] = acc;
            g[(j, i)] = acc;
        }
    }
    Ok(g)
}

/// Quadrature nodes on the sensor with the basis sampled at each node.
struct SensorQuadrature {
    weights: Vec<f64>,
    /// values[q * n + j] = e_j(x_q)
    values: Vec<f64>,
    n: usize,
}

impl SensorQuadrature {
    fn build(basis: &[Mode], domain: &Domain, sensor: &SensorSet, quad_points: usize) -> Result<Self> {
        if quad_points < 2 {
            return Err(Error::invalid("quad_points", "need at least 2 per half-wavelength"));
        }
        check_sensor(domain, sensor)?;
        let lengths = domain.lengths();
        let dim = lengths.len();
        let rule = GaussLegendre::cached(quad_points);
        // per-axis nodes of each piece: panels no wider than a half-wavelength
        let mut weights = Vec::new();
        let mut points: Vec<Vec<f64>> = Vec::new();
        for p in &sensor.pieces {
            let mut axis_nodes: Vec<Vec<(f64, f64)>> = Vec::with_capacity(dim);
            for axis in 0..dim {
                let top = basis.iter().map(|m| m.wave_numbers[axis]).max().unwrap_or(1);
                let h = lengths[axis] / top as f64;
                let (a, b) = (p.lo[axis], p.hi[axis]);
                let panels = ((b - a) / h).ceil().max(1.0) as usize;
                let w = (b - a) / panels as f64;
                let mut nodes = Vec::with_capacity(panels * quad_points);
                for k in 0..panels {
                    let lo = a + k as f64 * w;
                    let hi = if k + 1 == panels { b } else { lo + w };
                    nodes.extend(rule.mapped(lo, hi));
                }
                axis_nodes.push(nodes);
            }
            if dim == 1 {
                for &(x, w) in &axis_nodes[0] {
                    points.push(vec![x]);
                    weights.push(w);
                }
            } else {
                for &(x, wx) in &axis_nodes[0] {
                    for &(y, wy) in &axis_nodes[1] {
                        points.push(vec![x, y]);
                        weights.push(wx * wy);
                    }
                }
            }
        }
        let n = basis.len();
        let mut values = Vec::with_capacity(points.len() * n);
        for x in &points {
            for m in basis {
                let mut v = 1.0;
                for (axis, &l) in lengths.iter().enumerate() {
                    v *= sine_factor(m.wave_numbers[axis], l, x[axis]);
                }
                values.push(v);
            }
        }
        Ok(SensorQuadrature { weights, values, n })
    }

    fn l1_complex(&self, c: &[Complex64]) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(q, w)| {
                let row = &self.values[q * self.n..(q + 1) * self.n];
                let v: Complex64 = row.iter().zip(c).map(|(e, ci)| ci * e).sum();
                w * v.norm()
            })
            .sum()
    }

    /// Residual r_q = Σ_j c_j e_j(x_q) over the first `d` modes.
    fn residual(&self, c: &[f64], d: usize, out: &mut [f64]) {
        for (q, o) in out.iter_mut().enumerate() {
            let row = &self.values[q * self.n..q * self.n + d];
            *o = row.iter().zip(c).map(|(e, ci)| e * ci).sum();
        }
    }

    fn l1_real(&self, c: &[f64], d: usize, scratch: &mut [f64]) -> f64 {
        self.residual(c, d, scratch);
        self.weights.iter().zip(scratch.iter()).map(|(w, r)| w * r.abs()).sum()
    }
}

/// ∫_{G₀} |Σ c_n e_n(x)| dx by composite Gauss–Legendre with `quad_points`
/// nodes on every panel of one half-wavelength of the highest mode.
pub fn l1_sensor_norm(
    field: &SpectralField,
    basis: &[Mode],
    domain: &Domain,
    sensor: &SensorSet,
    quad_points: usize,
) -> Result<f64> {
    if field.basis_size() != basis.len() {
        return Err(Error::invalid("field", "size differs from basis"));
    }
    let q = SensorQuadrature::build(basis, domain, sensor, quad_points)?;
    Ok(q.l1_complex(&field.coeffs))
}

/// Search settings for [`spectral_constant_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSearch {
    pub quad_points: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Angular resolution of the exhaustive grid for dimensions 2 and 3.
    pub angular_points: usize,
    pub max_iterations: usize,
}

impl Default for ConstantSearch {
    fn default() -> Self {
        ConstantSearch {
            quad_points: 8,
            restarts: 50,
            seed: 42,
            angular_points: 360,
            max_iterations: 400,
        }
    }
}

/// C(λ) for one cut together with the minimizing real coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConstant {
    pub lambda_cut: f64,
    pub dimension: usize,
    pub constant: f64,
    pub minimizer: Vec<f64>,
    pub min_l1: f64,
}

/// Fit of log C(λ) = intercept + slope·√λ over several cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFit {
    pub points: Vec<SpectralConstant>,
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Majorize–minimize descent of Σ w_q √(r_q² + η²) on the unit sphere: each
/// step takes the smallest eigenvector of EᵀDE with D = diag(w_q/√(r_q²+η²)).
fn polish(quad: &SensorQuadrature, start: &[f64], d: usize, max_iterations: usize) -> (Vec<f64>, f64) {
    let nq = quad.weights.len();
    let mut scratch = vec![0.0; nq];
    let mut c = start.to_vec();
    normalize(&mut c);
    let mut best = quad.l1_real(&c, d, &mut scratch);
    let mut best_c = c.clone();
    let eta = 1e-9 * best.max(1e-300) / quad.weights.iter().sum::<f64>();
    for _ in 0..max_iterations {
        quad.residual(&c, d, &mut scratch);
        let mut m = DMatrix::<f64>::zeros(d, d);
        for q in 0..nq {
            let dq = quad.weights[q] / (scratch[q] * scratch[q] + eta * eta).sqrt();
            let row = &quad.values[q * quad.n..q * quad.n + d];
            for i in 0..d {
                let ri = row[i] * dq;
                for j in i..d {
                    m[(i, j)] += ri * row[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        let eig = SymmetricEigen::new(m);
        let k = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty");
        let mut next: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        // keep a consistent sign so the iterates can settle
        let dot: f64 = next.iter().zip(&c).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            next.iter_mut().for_each(|x| *x = -*x);
        }
        normalize(&mut next);
        let val = quad.l1_real(&next, d, &mut scratch);
        let step: f64 = next.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        c = next;
        if val < best {
            best = val;
            best_c = c.clone();
        }
        if step < 1e-12 {
            break;
        }
    }
    (best_c, best)
}

fn angular_candidates(d: usize, points: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0]],
        2 => (0..points)
            .map(|k| {
                let t = PI * k as f64 / points as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            // upper hemisphere suffices since the objective is even
            let rings = points / 2;
            let mut out = Vec::new();
            for i in 0..=rings {
                let th = 0.5 * PI * i as f64 / rings as f64;
                let around = ((points as f64 * th.sin()).ceil() as usize).max(1);
                for j in 0..around {
                    let ph = 2.0 * PI * j as f64 / around as f64;
                    out.push(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
                }
            }
            out
        }
    }
}

fn estimate_on(
    quad: &SensorQuadrature,
    d: usize,
    lambda_cut: f64,
    warm: Option<&[f64]>,
    opts: &ConstantSearch,
) -> Result<SpectralConstant> {
    let nq = quad.weights.len();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = warm {
        let mut v = w.to_vec();
        v.resize(d, 0.0);
        starts.push(v);
    }
    if d <= 3 {
        let grid = angular_candidates(d, opts.angular_points);
        let mut scratch = vec![0.0; nq];
        let scored: Vec<(f64, usize)> = grid
            .iter()
            .enumerate()
            .map(|(i, c)| (quad.l1_real(c, d, &mut scratch), i))
            .collect();
        let mut ranked = scored;
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, i) in ranked.iter().take(4) {
            starts.push(grid[i].clone());
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (d as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for _ in 0..opts.restarts {
            let mut v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            normalize(&mut v);
            starts.push(v);
        }
    }
    let results: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|s| polish(quad, s, d, opts.max_iterations))
        .collect();
    let (c, v) = results
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .map(|(_, r)| r)
        .expect("at least one start");
    if !(v.is_finite() && v > 1e-14) {
        return Err(Error::Degenerate(format!(
            "sensor L1 norm minimum {v:e} is numerically zero at dimension {d}"
        )));
    }
    Ok(SpectralConstant {
        lambda_cut,
        dimension: d,
        constant: 1.0 / v,
        minimizer: c,
        min_l1: v,
    })
}

/// C(λ) = max over real unit vectors c supported on {λ_j ≤ λ} of
/// ‖c‖₂ / ‖Σ c_j e_j‖_{L¹(G₀)}.
pub fn spectral_constant_estimate(
    basis: &[Mode],
    domain: &Domain,
    sensor: &SensorSet,
    lambda_cut: f64,
    opts: &ConstantSearch,
) -> Result<SpectralConstant> {
    let d = basis.iter().take_while(|m| m.lambda <= lambda_cut).count();
    if d == 0 {
        return Err(Error::invalid(
            "lambda_cut",
            format!("{lambda_cut} is below the first eigenvalue"),
        ));
    }
    let quad = SensorQuadrature::build(&basis[..d], domain, sensor, opts.quad_points)?;
    estimate_on(&quad, d, lambda_cut, None, opts)
}

/// C(λ) over increasing cuts, each search warm-started from the previous
/// minimizer so that the sequence is nondecreasing, plus the log-linear fit.
pub fn spectral_constant_fit(
    basis: &[Mode],
    domain: &Domain,
    sensor: &SensorSet,
    cuts: &[f64],
    opts: &ConstantSearch,
) -> Result<SpectralFit> {
    if cuts.len() < 2 {
        return Err(Error::invalid("cuts", "need at least two cuts for a fit"));
    }
    let mut sorted = cuts.to_vec();
    sorted.sort_by(f64::total_cmp);
    let dmax = basis
        .iter()
        .take_while(|m| m.lambda <= sorted[sorted.len() - 1])
        .count();
    if dmax == 0 {
        return Err(Error::invalid("cuts", "every cut is below the first eigenvalue"));
    }
    // One quadrature for all cuts, fine enough for the top mode.
    let quad = SensorQuadrature::build(&basis[..dmax], domain, sensor, opts.quad_points)?;
    let mut points: Vec<SpectralConstant> = Vec::with_capacity(sorted.len());
    for &cut in &sorted {
        let d = basis.iter().take_while(|m| m.lambda <= cut).count();
        if d == 0 {
            return Err(Error::invalid("cuts", format!("{cut} is below the first eigenvalue")));
        }
        let warm = points.last().map(|p| p.minimizer.as_slice());
        points.push(estimate_on(&quad, d, cut, warm, opts)?);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.lambda_cut.sqrt()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.constant.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("cuts", "cuts must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms_residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SpectralFit {
        points,
        slope,
        intercept,
        rms_residual,
    })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Coefficient vector as an nalgebra column.
pub fn to_dvector(f: &SpectralField) -> DVector<Complex64> {
    DVector::from_column_slice(f.coeffs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_and_rectangle_spectra() {
        let d = Domain::interval(PI).unwrap();
        let b = build_basis(&d, 3).unwrap();
        let l: Vec<f64> = b.iter().map(|m| m.lambda).collect();
        assert_eq!(l, vec![1.0, 4.0, 9.0]);
        let r = Domain::rectangle(PI, PI).unwrap();
        let b = build_basis(&r, 4).unwrap();
        let l: Vec<f64> = b.iter().map(|m| m.lambda).collect();
        assert_eq!(l, vec![2.0, 5.0, 5.0, 8.0]);
        assert_eq!(b[1].wave_numbers, vec![1, 2]);
        assert_eq!(b[2].wave_numbers, vec![2, 1]);
        let u = build_basis(&Domain::interval(1.0).unwrap(), 1).unwrap();
        assert_eq!(u[0].lambda, PI * PI);
        assert!(build_basis(&d, 0).is_err());
    }

    #[test]
    fn scaling_law_is_exact() {
        for dom in [Domain::interval(1.3).unwrap(), Domain::rectangle(1.0, 2.5).unwrap()] {
            let k = 3.7;
            let a = build_basis(&dom, 12).unwrap();
            let b = build_basis(&dom.scaled(k).unwrap(), 12).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(y.lambda, x.lambda / (k * k));
                assert_eq!(x.wave_numbers, y.wave_numbers);
            }
        }
    }

    #[test]
    fn eigenfunction_values() {
        let d = Domain::interval(1.0).unwrap();
        let b = build_basis(&d, 2).unwrap();
        assert!((eigenfunction_eval(&b[0], &d, &[0.5]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(eigenfunction_eval(&b[1], &d, &[1.0]).unwrap(), 0.0);
        assert!(matches!(
            eigenfunction_eval(&b[0], &d, &[1.5]),
            Err(Error::PointOutsideDomain(_))
        ));
    }

    #[test]
    fn sensor_validation() {
        let d = Domain::interval(1.0).unwrap();
        assert!(SensorSet::intervals(&d, &[(0.2, 0.2)]).is_err());
        assert!(SensorSet::intervals(&d, &[(0.2, 1.2)]).is_err());
        assert!(SensorSet::intervals(&d, &[(0.1, 0.4), (0.3, 0.5)]).is_err());
        let s = SensorSet::intervals(&d, &[(0.1, 0.3), (0.3, 0.5)]).unwrap();
        assert!((s.measure() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn gram_closed_forms() {
        let d = Domain::interval(1.0).unwrap();
        let b = build_basis(&d, 5).unwrap();
        let full = sensor_gram(&b, &d, &SensorSet::full(&d)).unwrap();
        assert!((full - DMatrix::identity(5, 5)).amax() < 1e-14);
        let half = SensorSet::intervals(&d, &[(0.0, 0.5)]).unwrap();
        let g = sensor_gram(&b, &d, &half).unwrap();
        assert!((g[(0, 0)] - 0.5).abs() < 1e-15);
        assert!(min_symmetric_eigenvalue(&g) > -1e-12);
    }

    #[test]
    fn l1_norm_single_mode() {
        let d = Domain::interval(1.0).unwrap();
        let b = build_basis(&d, 1).unwrap();
        let s = SensorSet::full(&d);
        let v = l1_sensor_norm(&SpectralField::unit(1, 0), &b, &d, &s, 8).unwrap();
        assert!((v - 2.0 * 2f64.sqrt() / PI).abs() < 1e-12);
        assert_eq!(l1_sensor_norm(&SpectralField::zeros(1), &b, &d, &s, 8).unwrap(), 0.0);
        assert!(l1_sensor_norm(&SpectralField::unit(1, 0), &b, &d, &s, 1).is_err());
        let c = spectral_constant_estimate(&b, &d, &s, PI * PI, &ConstantSearch::default()).unwrap();
        assert!((c.constant - PI / (2.0 * 2f64.sqrt())).abs() < 1e-10);
    }
}
