//! Curvature engine for metric fields.
//!
//! Conventions: `Γ^r_{mn}` is stored as `gamma.get(r, m, n)`. The Riemann
//! tensor is `R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}`,
//! stored as `riem.get(a, b, c, d)`, with Ricci `R_{bd} = R^a_{bad}`. With
//! these signs the round sphere has positive scalar curvature and the
//! sectional curvature is `R_{abcd} u^a v^b u^c v^d / (|u|²|v|² − ⟨u,v⟩²)`.

pub mod fixtures;
pub mod tensor;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
pub use tensor::{Tensor3, Tensor4};

/// A smooth field of symmetric positive-definite matrices over an open domain.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;

    /// `Ok(())` iff `x` lies in the domain (length included).
    fn check_domain(&self, x: &[f64]) -> Result<()>;

    /// The metric at `x`.
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    /// Label used in trajectory metadata.
    fn name(&self) -> String {
        String::from("metric")
    }

    /// `d.get(k, i, j) = ∂_k g_{ij}` in closed form, when available.
    fn metric_jacobian(&self, _x: &[f64]) -> Result<Tensor3> {
        Err(Error::AnalyticUnavailable)
    }

    /// `h.get(k, l, i, j) = ∂_k ∂_l g_{ij}` in closed form, when available.
    fn metric_hessian(&self, _x: &[f64]) -> Result<Tensor4> {
        Err(Error::AnalyticUnavailable)
    }
}

impl<T: MetricField + ?Sized> MetricField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn check_domain(&self, x: &[f64]) -> Result<()> {
        (**self).check_domain(x)
    }
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        (**self).metric(x)
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn metric_jacobian(&self, x: &[f64]) -> Result<Tensor3> {
        (**self).metric_jacobian(x)
    }
    fn metric_hessian(&self, x: &[f64]) -> Result<Tensor4> {
        (**self).metric_hessian(x)
    }
}

/// Central-difference settings.
///
/// First derivatives of the metric use step `h·max(1, |x_k|)`. Derivatives of
/// the connection use `curvature_step_factor` times that step, optionally
/// Richardson-extrapolated; nesting two differences at the same tiny step
/// lets roundoff dominate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiff {
    pub h: f64,
    pub curvature_step_factor: f64,
    pub richardson: bool,
}

impl Default for FiniteDiff {
    fn default() -> Self {
        Self {
            h: 1e-5,
            curvature_step_factor: 100.0,
            richardson: true,
        }
    }
}

impl FiniteDiff {
    /// Plain nested central differences at a single step, no extrapolation.
    pub fn plain(h: f64) -> Self {
        Self {
            h,
            curvature_step_factor: 1.0,
            richardson: false,
        }
    }

    pub fn with_step(h: f64) -> Self {
        Self {
            h,
            ..Self::default()
        }
    }
}

/// How metric derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Analytic,
    FiniteDiff(FiniteDiff),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::FiniteDiff(FiniteDiff::default())
    }
}

#[inline]
fn scaled_step(h: f64, xk: f64) -> f64 {
    h * xk.abs().max(1.0)
}

fn shifted(x: &[f64], k: usize, delta: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[k] += delta;
    y
}

/// Evaluates `f` at a stencil point, reporting a domain failure as a
/// boundary problem of coordinate `k`.
fn at_stencil<T>(
    field: &(impl MetricField + ?Sized),
    y: &[f64],
    k: usize,
    f: impl FnOnce(&[f64]) -> Result<T>,
) -> Result<T> {
    if field.check_domain(y).is_err() {
        return Err(Error::BoundaryTooClose { coordinate: k });
    }
    f(y)
}

/// Inverse of a symmetric positive-definite matrix.
pub fn inverse_metric(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = g.clone().cholesky().ok_or(Error::SingularMetric)?;
    Ok(chol.inverse())
}

/// `∂_k g_{ij}` for the chosen backend.
pub fn metric_jacobian<F: MetricField + ?Sized>(
    field: &F,
    x: &[f64],
    backend: Backend,
) -> Result<Tensor3> {
    field.check_domain(x)?;
    match backend {
        Backend::Analytic => field.metric_jacobian(x),
        Backend::FiniteDiff(fd) => metric_jacobian_fd(field, x, fd.h),
    }
}

fn metric_jacobian_fd<F: MetricField + ?Sized>(field: &F, x: &[f64], h: f64) -> Result<Tensor3> {
    let n = field.dim();
    let mut d = Tensor3::zeros(n);
    for k in 0..n {
        let hk = scaled_step(h, x[k]);
        let gp = at_stencil(field, &shifted(x, k, hk), k, |y| field.metric(y))?;
        let gm = at_stencil(field, &shifted(x, k, -hk), k, |y| field.metric(y))?;
        for i in 0..n {
            for j in 0..n {
                d.set(k, i, j, (gp[(i, j)] - gm[(i, j)]) / (2.0 * hk));
            }
        }
    }
    Ok(d)
}

/// `Γ^r_{mn} = ½ g^{rs} (∂_m g_{sn} + ∂_n g_{sm} − ∂_s g_{mn})`.
pub fn christoffel_from(ginv: &DMatrix<f64>, dg: &Tensor3) -> Tensor3 {
    let n = dg.dim();
    let mut lowered = Tensor3::zeros(n);
    for s in 0..n {
        for m in 0..n {
            for nn in m..n {
                let v = 0.5 * (dg.get(m, s, nn) + dg.get(nn, s, m) - dg.get(s, m, nn));
                lowered.set(s, m, nn, v);
                lowered.set(s, nn, m, v);
            }
        }
    }
    let mut gamma = Tensor3::zeros(n);
    for r in 0..n {
        let row: Vec<(usize, f64)> = (0..n).map(|s| (s, ginv[(r, s)])).filter(|(_, v)| *v != 0.0).collect();
        for m in 0..n {
            for nn in m..n {
                let acc: f64 = row.iter().map(|&(s, gi)| gi * lowered.get(s, m, nn)).sum();
                gamma.set(r, m, nn, acc);
                gamma.set(r, nn, m, acc);
            }
        }
    }
    gamma
}

/// Christoffel symbols of the second kind.
pub fn christoffel<F: MetricField + ?Sized>(field: &F, x: &[f64], backend: Backend) -> Result<Tensor3> {
    let g = field.metric(x)?;
    let ginv = inverse_metric(&g)?;
    let dg = metric_jacobian(field, x, backend)?;
    Ok(christoffel_from(&ginv, &dg))
}

/// `d.get(k, r, m, n) = ∂_k Γ^r_{mn}`.
pub fn christoffel_jacobian<F: MetricField + ?Sized>(
    field: &F,
    x: &[f64],
    backend: Backend,
) -> Result<Tensor4> {
    match backend {
        Backend::Analytic => christoffel_jacobian_analytic(field, x),
        Backend::FiniteDiff(fd) => christoffel_jacobian_fd(field, x, fd),
    }
}

/// Connection and its first derivatives in one pass.
pub fn connection_with_jacobian<F: MetricField + ?Sized>(
    field: &F,
    x: &[f64],
    backend: Backend,
) -> Result<(Tensor3, Tensor4)> {
    match backend {
        Backend::Analytic => connection_analytic(field, x),
        Backend::FiniteDiff(fd) => Ok((christoffel(field, x, backend)?, christoffel_jacobian_fd(field, x, fd)?)),
    }
}

fn christoffel_jacobian_analytic<F: MetricField + ?Sized>(field: &F, x: &[f64]) -> Result<Tensor4> {
    connection_analytic(field, x).map(|(_, d)| d)
}

fn connection_analytic<F: MetricField + ?Sized>(field: &F, x: &[f64]) -> Result<(Tensor3, Tensor4)> {
    let n = field.dim();
    let g = field.metric(x)?;
    let ginv = inverse_metric(&g)?;
    let dg = field.metric_jacobian(x)?;
    let d2g = field.metric_hessian(x)?;
    let gamma = christoffel_from(&ginv, &dg);
    // ∂_k Γ^r_{mn} = g^{rs} (∂_k Γ_{smn} − ∂_k g_{sa} Γ^a_{mn})
    let mut out = Tensor4::zeros(n);
    let mut inner = vec![0.0; n];
    for k in 0..n {
        for m in 0..n {
            for nn in m..n {
                for (s, slot) in inner.iter_mut().enumerate() {
                    let dlow = 0.5 * (d2g.get(k, m, s, nn) + d2g.get(k, nn, s, m) - d2g.get(k, s, m, nn));
                    let mut corr = 0.0;
                    for a in 0..n {
                        let d = dg.get(k, s, a);
                        if d != 0.0 {
                            corr += d * gamma.get(a, m, nn);
                        }
                    }
                    *slot = dlow - corr;
                }
                for r in 0..n {
                    let v: f64 = (0..n).map(|s| ginv[(r, s)] * inner[s]).sum();
                    out.set(k, r, m, nn, v);
                    out.set(k, r, nn, m, v);
                }
            }
        }
    }
    Ok((gamma, out))
}

fn christoffel_jacobian_fd<F: MetricField + ?Sized>(
    field: &F,
    x: &[f64],
    fd: FiniteDiff,
) -> Result<Tensor4> {
    let n = field.dim();
    let inner = Backend::FiniteDiff(fd);
    let mut out = Tensor4::zeros(n);
    let gamma_at = |y: &[f64], k: usize| at_stencil(field, y, k, |y| christoffel(field, y, inner));
    for k in 0..n {
        let hk = fd.curvature_step_factor * scaled_step(fd.h, x[k]);
        let d1 = {
            let gp = gamma_at(&shifted(x, k, hk), k)?;
            let gm = gamma_at(&shifted(x, k, -hk), k)?;
            gp.axpy(-1.0, &gm)
        };
        let deriv = if fd.richardson {
            let gp = gamma_at(&shifted(x, k, 2.0 * hk), k)?;
            let gm = gamma_at(&shifted(x, k, -2.0 * hk), k)?;
            let d2 = gp.axpy(-1.0, &gm);
            // (4 D(h) − D(2h)) / 3 with D(h) = Δ/(2h), D(2h) = Δ₂/(4h)
            let mut t = Tensor3::zeros(n);
            for r in 0..n {
                for m in 0..n {
                    for nn in 0..n {
                        let a = d1.get(r, m, nn) / (2.0 * hk);
                        let b = d2.get(r, m, nn) / (4.0 * hk);
                        t.set(r, m, nn, (4.0 * a - b) / 3.0);
                    }
                }
            }
            t
        } else {
            let mut t = Tensor3::zeros(n);
            for r in 0..n {
                for m in 0..n {
                    for nn in 0..n {
                        t.set(r, m, nn, d1.get(r, m, nn) / (2.0 * hk));
                    }
                }
            }
            t
        };
        for r in 0..n {
            for m in 0..n {
                for nn in 0..n {
                    out.set(k, r, m, nn, deriv.get(r, m, nn));
                }
            }
        }
    }
    Ok(out)
}

/// Assembles `R^a_{bcd}` from the connection and its derivatives.
pub fn riemann_from(gamma: &Tensor3, dgamma: &Tensor4) -> Tensor4 {
    let n = gamma.dim();
    // nonzero[a][c] lists (e, Γ^a_{ce}) with Γ^a_{ce} ≠ 0
    let nonzero: Vec<Vec<Vec<(usize, f64)>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|c| {
                    (0..n)
                        .map(|e| (e, gamma.get(a, c, e)))
                        .filter(|(_, v)| *v != 0.0)
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut r = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in (c + 1)..n {
                    let mut v = dgamma.get(c, a, d, b) - dgamma.get(d, a, c, b);
                    for &(e, ace) in &nonzero[a][c] {
                        v += ace * gamma.get(e, d, b);
                    }
                    for &(e, ade) in &nonzero[a][d] {
                        v -= ade * gamma.get(e, c, b);
                    }
                    r.set(a, b, c, d, v);
                    r.set(a, b, d, c, -v);
                }
            }
        }
    }
    r
}

/// The Riemann tensor `R^a_{bcd}`.
pub fn riemann<F: MetricField + ?Sized>(field: &F, x: &[f64], backend: Backend) -> Result<Tensor4> {
    let gamma = christoffel(field, x, backend)?;
    let dgamma = christoffel_jacobian(field, x, backend)?;
    Ok(riemann_from(&gamma, &dgamma))
}

/// `R_{abcd} = g_{ae} R^e_{bcd}`.
pub fn lower_riemann(g: &DMatrix<f64>, riem: &Tensor4) -> Tensor4 {
    let n = riem.dim();
    let mut out = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = 0.0;
                    for e in 0..n {
                        let gae = g[(a, e)];
                        if gae != 0.0 {
                            v += gae * riem.get(e, b, c, d);
                        }
                    }
                    out.set(a, b, c, d, v);
                }
            }
        }
    }
    out
}

/// `R_{bd} = R^a_{bad}`.
pub fn ricci_from(riem: &Tensor4) -> DMatrix<f64> {
    let n = riem.dim();
    DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| riem.get(a, b, a, d)).sum())
}

/// `R = g^{bd} R_{bd}`.
pub fn scalar_from(ginv: &DMatrix<f64>, ricci: &DMatrix<f64>) -> f64 {
    ginv.component_mul(ricci).sum()
}

/// `g^{ac} g^{bd} R_{abcd}`, which must equal the scalar curvature.
pub fn double_trace(ginv: &DMatrix<f64>, lowered: &Tensor4) -> f64 {
    let n = lowered.dim();
    let mut acc = 0.0;
    for a in 0..n {
        for c in 0..n {
            let gac = ginv[(a, c)];
            if gac == 0.0 {
                continue;
            }
            for b in 0..n {
                for d in 0..n {
                    acc += gac * ginv[(b, d)] * lowered.get(a, b, c, d);
                }
            }
        }
    }
    acc
}

pub fn ricci<F: MetricField + ?Sized>(field: &F, x: &[f64], backend: Backend) -> Result<DMatrix<f64>> {
    Ok(ricci_from(&riemann(field, x, backend)?))
}

pub fn ricci_scalar<F: MetricField + ?Sized>(field: &F, x: &[f64], backend: Backend) -> Result<f64> {
    let g = field.metric(x)?;
    let ginv = inverse_metric(&g)?;
    Ok(scalar_from(&ginv, &ricci(field, x, backend)?))
}

fn inner(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += g[(i, j)] * u[i] * v[j];
        }
    }
    acc
}

/// Sectional curvature of the plane spanned by `u`, `v`, given the lowered tensor.
pub fn sectional_from(g: &DMatrix<f64>, lowered: &Tensor4, u: &[f64], v: &[f64]) -> Result<f64> {
    let n = lowered.dim();
    if u.len() != n || v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len().min(v.len()),
        });
    }
    let area = inner(g, u, u) * inner(g, v, v) - inner(g, u, v).powi(2);
    if area < 1e-14 {
        return Err(Error::DegeneratePlane { area });
    }
    let mut num = 0.0;
    for a in 0..n {
        if u[a] == 0.0 {
            continue;
        }
        for b in 0..n {
            if v[b] == 0.0 {
                continue;
            }
            for c in 0..n {
                if u[c] == 0.0 {
                    continue;
                }
                for d in 0..n {
                    num += lowered.get(a, b, c, d) * u[a] * v[b] * u[c] * v[d];
                }
            }
        }
    }
    Ok(num / area)
}

pub fn sectional_curvature<F: MetricField + ?Sized>(
    field: &F,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    backend: Backend,
) -> Result<f64> {
    let g = field.metric(x)?;
    let lowered = lower_riemann(&g, &riemann(field, x, backend)?);
    sectional_from(&g, &lowered, u, v)
}

/// Gram-Schmidt on the coordinate basis in the metric inner product, in
/// coordinate order.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
    let n = g.nrows();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        for f in &frame {
            let p = inner(g, &e, f);
            for i in 0..n {
                e[i] -= p * f[i];
            }
        }
        let norm = inner(g, &e, &e);
        if !(norm > 0.0) {
            return Err(Error::SingularMetric);
        }
        let s = norm.sqrt();
        e.iter_mut().for_each(|c| *c /= s);
        frame.push(e);
    }
    Ok(frame)
}

/// `Σ_{ρ≠σ} K(e_ρ, e_σ)` over the orthonormal frame (ordered pairs).
pub fn sectional_sum_from(g: &DMatrix<f64>, lowered: &Tensor4) -> Result<f64> {
    let frame = orthonormal_frame(g)?;
    let mut acc = 0.0;
    for (i, a) in frame.iter().enumerate() {
        for (j, b) in frame.iter().enumerate() {
            if i != j {
                acc += sectional_from(g, lowered, a, b)?;
            }
        }
    }
    Ok(acc)
}

pub fn sectional_sum<F: MetricField + ?Sized>(field: &F, x: &[f64], backend: Backend) -> Result<f64> {
    let g = field.metric(x)?;
    let lowered = lower_riemann(&g, &riemann(field, x, backend)?);
    sectional_sum_from(&g, &lowered)
}

/// Projective Weyl tensor and its largest component.
#[derive(Debug, Clone)]
pub struct WeylProjective {
    pub tensor: Tensor4,
    pub max_abs: f64,
}

/// `W_{abcd} = R_{abcd} − R/(n(n−1)) (g_{ac} g_{bd} − g_{ad} g_{bc})`.
pub fn weyl_from(g: &DMatrix<f64>, lowered: &Tensor4, scalar: f64) -> WeylProjective {
    let n = lowered.dim();
    let mut w = Tensor4::zeros(n);
    let c = if n > 1 {
        scalar / (n * (n - 1)) as f64
    } else {
        0.0
    };
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    let iso = g[(a, cc)] * g[(b, d)] - g[(a, d)] * g[(b, cc)];
                    w.set(a, b, cc, d, lowered.get(a, b, cc, d) - c * iso);
                }
            }
        }
    }
    let max_abs = w.max_abs();
    WeylProjective { tensor: w, max_abs }
}

pub fn weyl_projective<F: MetricField + ?Sized>(
    field: &F,
    x: &[f64],
    backend: Backend,
) -> Result<WeylProjective> {
    if field.dim() < 2 {
        return Err(Error::InvalidArgument("projective Weyl tensor needs dim >= 2".into()));
    }
    let b = curvature_bundle(field, x, backend)?;
    Ok(b.weyl)
}

/// A smooth vector field given in contravariant components.
pub struct VectorField {
    dim: usize,
    f: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl VectorField {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { dim, f: Box::new(f) }
    }

    pub fn constant(v: Vec<f64>) -> Self {
        let dim = v.len();
        Self::new(dim, move |_| v.clone())
    }

    /// The coordinate field `∂_k`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        Self::constant(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorField").field("dim", &self.dim).finish()
    }
}

/// `D_μ K_ν + D_ν K_μ` for the field `k`. Its derivatives are always taken
/// by central differences with the backend's step (1e−5 for `Analytic`).
pub fn killing_residual<F: MetricField + ?Sized>(
    field: &F,
    x: &[f64],
    k: &VectorField,
    backend: Backend,
) -> Result<DMatrix<f64>> {
    let n = field.dim();
    if k.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: k.dim(),
        });
    }
    let g = field.metric(x)?;
    let ginv = inverse_metric(&g)?;
    let dg = metric_jacobian(field, x, backend)?;
    let gamma = christoffel_from(&ginv, &dg);
    let h = match backend {
        Backend::FiniteDiff(fd) => fd.h,
        Backend::Analytic => 1e-5,
    };
    let kx = k.evaluate(x);
    let k_low: Vec<f64> = (0..n).map(|i| (0..n).map(|a| g[(i, a)] * kx[a]).sum()).collect();
    // dk[m][a] = ∂_m K^a
    let mut dk = vec![vec![0.0; n]; n];
    for m in 0..n {
        let hm = scaled_step(h, x[m]);
        let yp = shifted(x, m, hm);
        let ym = shifted(x, m, -hm);
        at_stencil(field, &yp, m, |_| Ok(()))?;
        at_stencil(field, &ym, m, |_| Ok(()))?;
        let kp = k.evaluate(&yp);
        let km = k.evaluate(&ym);
        for a in 0..n {
            dk[m][a] = (kp[a] - km[a]) / (2.0 * hm);
        }
    }
    let cov = |m: usize, nu: usize| -> f64 {
        let mut d = 0.0;
        for a in 0..n {
            d += dg.get(m, nu, a) * kx[a] + g[(nu, a)] * dk[m][a];
            d -= gamma.get(a, m, nu) * k_low[a];
        }
        d
    };
    Ok(DMatrix::from_fn(n, n, |m, nu| cov(m, nu) + cov(nu, m)))
}

/// All curvature quantities at one point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub point: Vec<f64>,
    pub metric: DMatrix<f64>,
    pub inverse_metric: DMatrix<f64>,
    pub christoffel: Tensor3,
    pub riemann: Tensor4,
    pub riemann_lowered: Tensor4,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub weyl: WeylProjective,
}

impl CurvatureBundle {
    pub fn sectional(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        sectional_from(&self.metric, &self.riemann_lowered, u, v)
    }

    pub fn sectional_sum(&self) -> Result<f64> {
        sectional_sum_from(&self.metric, &self.riemann_lowered)
    }

    pub fn double_trace(&self) -> f64 {
        double_trace(&self.inverse_metric, &self.riemann_lowered)
    }
}

pub fn curvature_bundle<F: MetricField + ?Sized>(
    field: &F,
    x: &[f64],
    backend: Backend,
) -> Result<CurvatureBundle> {
    let g = field.metric(x)?;
    let ginv = inverse_metric(&g)?;
    let dg = metric_jacobian(field, x, backend)?;
    let gamma = christoffel_from(&ginv, &dg);
    let dgamma = christoffel_jacobian(field, x, backend)?;
    let riem = riemann_from(&gamma, &dgamma);
    let lowered = lower_riemann(&g, &riem);
    let ric = ricci_from(&riem);
    let scalar = scalar_from(&ginv, &ric);
    let weyl = weyl_from(&g, &lowered, scalar);
    Ok(CurvatureBundle {
        point: x.to_vec(),
        metric: g,
        inverse_metric: ginv,
        christoffel: gamma,
        riemann: riem,
        riemann_lowered: lowered,
        ricci: ric,
        scalar,
        weyl,
    })
}

/// `√det g`.
pub fn volume_density<F: MetricField + ?Sized>(field: &F, x: &[f64]) -> Result<f64> {
    let g = field.metric(x)?;
    let chol = g.cholesky().ok_or(Error::SingularMetric)?;
    let l = chol.l();
    Ok(l.diagonal().iter().product::<f64>())
}

/// Convenience: metric-vector contraction `g(u, v)`.
pub fn metric_inner(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let uu = DVector::from_column_slice(u);
    let vv = DVector::from_column_slice(v);
    (uu.transpose() * g * vv)[(0, 0)]
}
