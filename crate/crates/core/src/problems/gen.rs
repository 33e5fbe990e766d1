//! Instance generators. Stream ids are fixed per array; changing one would
//! change every published trace.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{rand_open01, randn, rng_stream};
use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::linop::LinearMap;
use crate::penalty::PenaltySpec;
use crate::problem::{CompositeProblem, FeasibilityMetric, ProblemInstance, Reference, SmoothTerm};
use crate::prox::ProxFunction;
use crate::set::ConvexSet;
use crate::vector::sqrt;

const S_R: u64 = 1;
const S_Q: u64 = 2;
const S_B: u64 = 3;
const S_YNAT: u64 = 4;
const S_LO: u64 = 5;
const S_HI: u64 = 6;
const S_SUPPORT: u64 = 7;
const S_NOISE: u64 = 8;
const S_ROWS: u64 = 9;
const S_CENTER: u64 = 10;
/// Measurement row `i` of the TV instance uses stream `S_MEAS_BASE + i`.
const S_MEAS_BASE: u64 = 1 << 32;

fn gaussian_matrix(seed: u64, stream: u64, rows: usize, cols: usize, scale: f64) -> Matrix {
    let mut rng = rng_stream(seed, stream);
    let data = randn(&mut rng, rows * cols).into_iter().map(|v| v * scale).collect();
    Matrix::from_row_major(rows, cols, data).expect("sizes agree")
}

/// Parameters sufficient to regenerate an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSpec {
    Qp {
        p2: usize,
        n: usize,
        strongly_convex: bool,
        seed: u64,
    },
    ElasticSqrt {
        p2: usize,
        n: usize,
        s: usize,
        kappa1: f64,
        kappa2: f64,
        noise_sigma: f64,
        seed: u64,
    },
    TvRecon {
        height: usize,
        width: usize,
        sample_rate: f64,
        kappa: f64,
        noise_sigma: f64,
        seed: u64,
    },
    SqrtLoss {
        p: usize,
        kappa1: f64,
        kappa2: f64,
        seed: u64,
    },
    ConicLp,
}

/// Raw data of `min ½yᵀQy + qᵀy s.t. a ≤ By ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpData {
    pub q_mat: Matrix,
    pub q: Vec<f64>,
    pub b_mat: Matrix,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub y_natural: Vec<f64>,
    pub mu: f64,
}

impl QpData {
    pub fn objective(&self, y: &[f64]) -> f64 {
        0.5 * self.q_mat.quad_form(y) + crate::vector::dot(&self.q, y)
    }

    /// Template form: `f = δ_[a,b]` on `x = By`, `A = −I`, `c = 0`, `K = {0}`.
    pub fn to_template(&self, seed: u64) -> Result<ProblemInstance> {
        let n = self.b_mat.rows();
        let spec = PenaltySpec::new(
            LinearMap::identity(n).scaled(-1.0),
            LinearMap::dense(self.b_mat.clone()),
            vec![0.0; n],
            ConvexSet::SingletonZero(n),
        )?;
        let f = ProxFunction::box_indicator(self.lo.clone(), self.hi.clone())?;
        let g = ProxFunction::quadratic(self.q_mat.clone(), self.q.clone(), self.mu)?;
        let mut p = ProblemInstance::new(f, g, spec)?;
        p.feasibility = FeasibilityMetric::RelativeBox {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        };
        p.seed = seed;
        Ok(p)
    }
}

#[derive(Debug, Clone)]
pub struct QpInstance {
    pub data: QpData,
    pub problem: ProblemInstance,
}

pub fn gen_qp(p2: usize, n: usize, strongly_convex: bool, seed: u64) -> Result<QpInstance> {
    if p2 == 0 || n == 0 {
        return Err(Error::Config("QP sizes must be positive".into()));
    }
    let m = p2 / 2 + 1;
    let r = gaussian_matrix(seed, S_R, p2, m, 1.0 / sqrt(m as f64));
    let mu = if strongly_convex { 1.0 } else { 0.0 };
    let q_mat = r.gram_rows().shifted(1.0, mu);
    let q = randn(&mut rng_stream(seed, S_Q), p2);
    let b_mat = gaussian_matrix(seed, S_B, n, p2, 1.0 / sqrt(n as f64));
    let y_natural = randn(&mut rng_stream(seed, S_YNAT), p2);
    let by = b_mat.matvec(&y_natural);
    let u_lo = rand_open01(&mut rng_stream(seed, S_LO), n);
    let u_hi = rand_open01(&mut rng_stream(seed, S_HI), n);
    let lo: Vec<f64> = by.iter().zip(&u_lo).map(|(v, u)| v - u).collect();
    let hi: Vec<f64> = by.iter().zip(&u_hi).map(|(v, u)| v + u).collect();
    let data = QpData {
        q_mat,
        q,
        b_mat,
        lo,
        hi,
        y_natural,
        mu,
    };
    let problem = data.to_template(seed)?;
    Ok(QpInstance { data, problem })
}

/// Square-root elastic net `min ‖By − c‖ + (κ₁/2)‖y‖² + κ₂‖y‖₁`, written
/// as `−x + By = c` with `f = ‖·‖₂`.
#[derive(Debug, Clone)]
pub struct ElasticInstance {
    pub b_mat: Matrix,
    pub c: Vec<f64>,
    pub y_natural: Vec<f64>,
    pub kappa1: f64,
    pub kappa2: f64,
    pub problem: ProblemInstance,
}

/// `s` distinct indices out of `0..n` (partial Fisher-Yates).
fn sample_indices(rng: &mut impl Rng, n: usize, s: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..s {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut out = idx[..s].to_vec();
    out.sort_unstable();
    out
}

pub fn gen_elastic_sqrt(
    p2: usize,
    n: usize,
    s: usize,
    kappa1: f64,
    kappa2: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<ElasticInstance> {
    if p2 == 0 || n == 0 || s > p2 {
        return Err(Error::Config("elastic-net sizes need p2, n >= 1 and s <= p2".into()));
    }
    let b_mat = gaussian_matrix(seed, S_B, n, p2, 1.0 / sqrt(n as f64));
    let support = sample_indices(&mut rng_stream(seed, S_SUPPORT), p2, s);
    let vals = randn(&mut rng_stream(seed, S_YNAT), s);
    let mut y_natural = vec![0.0; p2];
    for (i, v) in support.iter().zip(vals) {
        y_natural[*i] = v;
    }
    let mut c = b_mat.matvec(&y_natural);
    if noise_sigma != 0.0 {
        let e = randn(&mut rng_stream(seed, S_NOISE), n);
        c.iter_mut().zip(e).for_each(|(ci, ei)| *ci += noise_sigma * ei);
    }
    let g = if kappa1 == 0.0 {
        ProxFunction::l1(kappa2)?
    } else {
        ProxFunction::elastic(kappa1, kappa2)?
    };
    let spec = PenaltySpec::new(
        LinearMap::identity(n).scaled(-1.0),
        LinearMap::dense(b_mat.clone()),
        c.clone(),
        ConvexSet::SingletonZero(n),
    )?;
    let mut problem = ProblemInstance::new(ProxFunction::l2_norm(), g, spec)?;
    problem.seed = seed;
    Ok(ElasticInstance {
        b_mat,
        c,
        y_natural,
        kappa1,
        kappa2,
        problem,
    })
}

/// TV-regularized reconstruction `min κ‖DY‖₁ + ½‖𝒜Y − b‖²` written as
/// `−x + DY = 0`, `f = κ‖·‖₁`, `g = 0`, `h = ½‖𝒜Y − b‖²`.
#[derive(Debug, Clone)]
pub struct TvInstance {
    pub height: usize,
    pub width: usize,
    pub image: Vec<f64>,
    /// Sampled rows of the full `N×N` Gaussian matrix, in increasing order.
    pub rows: Vec<usize>,
    pub measurement: Matrix,
    pub b: Vec<f64>,
    pub kappa: f64,
    pub problem: ProblemInstance,
}

/// Piecewise-constant phantom: two overlapping rectangles and a disc on a
/// zero background, intensities in `[0, 1]`.
pub fn phantom(height: usize, width: usize) -> Vec<f64> {
    let mut img = vec![0.0; height * width];
    let (h, w) = (height as f64, width as f64);
    for i in 0..height {
        for j in 0..width {
            let (y, x) = ((i as f64 + 0.5) / h, (j as f64 + 0.5) / w);
            let mut v = 0.0;
            if (0.15..0.65).contains(&y) && (0.2..0.8).contains(&x) {
                v = 0.6;
            }
            if (0.4..0.85).contains(&y) && (0.45..0.7).contains(&x) {
                v = 1.0;
            }
            let (dy, dx) = (y - 0.7, x - 0.3);
            if dy * dy + dx * dx < 0.02 {
                v = 0.3;
            }
            img[i * width + j] = v;
        }
    }
    img
}

pub fn gen_tv_recon(
    height: usize,
    width: usize,
    sample_rate: f64,
    kappa: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<TvInstance> {
    if !(sample_rate > 0.0 && sample_rate <= 1.0) {
        return Err(Error::Config("sample rate must lie in (0, 1]".into()));
    }
    if height == 0 || width == 0 {
        return Err(Error::Config("image sizes must be positive".into()));
    }
    let n_pix = height * width;
    let m = libm::ceil(sample_rate * n_pix as f64) as usize;
    let m = m.clamp(1, n_pix);
    let rows = sample_indices(&mut rng_stream(seed, S_ROWS), n_pix, m);
    let scale = 1.0 / sqrt(m as f64);
    let mut data = Vec::with_capacity(m * n_pix);
    for &r in &rows {
        let mut rng = rng_stream(seed, S_MEAS_BASE + r as u64);
        data.extend(randn(&mut rng, n_pix).into_iter().map(|v| v * scale));
    }
    let measurement = Matrix::from_row_major(m, n_pix, data)?;
    let image = phantom(height, width);
    let mut b = measurement.matvec(&image);
    if noise_sigma != 0.0 {
        let e = randn(&mut rng_stream(seed, S_NOISE), m);
        b.iter_mut().zip(e).for_each(|(bi, ei)| *bi += noise_sigma * ei);
    }
    let d = LinearMap::diff_stencil_2d(height, width);
    let nd = d.rows();
    let spec = PenaltySpec::new(LinearMap::identity(nd).scaled(-1.0), d, vec![0.0; nd], ConvexSet::SingletonZero(nd))?;
    let h = SmoothTerm::least_squares(LinearMap::dense(measurement.clone()), b.clone(), 0.0)?;
    let mut problem = ProblemInstance::new(ProxFunction::l1(kappa)?, ProxFunction::zero(), spec)?.with_smooth(h)?;
    problem.seed = seed;
    Ok(TvInstance {
        height,
        width,
        image,
        rows,
        measurement,
        b,
        kappa,
        problem,
    })
}

/// `min ⟨q, y⟩ s.t. 𝓑y + x = c, x ≥ 0` with `𝓑 = [[1,0],[0,1],[−1,−1]]`,
/// `c = 1`, `q = (1, 2)`. Solution `y* = (1, −2)`, `x* = (0, 3, 0)`,
/// `λ* = (−1, 0, −2)`, `F* = −3`.
#[derive(Debug, Clone)]
pub struct ConicInstance {
    pub problem: ProblemInstance,
}

pub fn gen_conic_lp() -> Result<ConicInstance> {
    let bm = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]])?;
    let spec = PenaltySpec::new(
        LinearMap::identity(3),
        LinearMap::dense(bm),
        vec![1.0; 3],
        ConvexSet::SingletonZero(3),
    )?;
    let f = ProxFunction::set_indicator(ConvexSet::NonnegOrthant(3));
    let g = ProxFunction::linear(vec![1.0, 2.0]);
    let problem = ProblemInstance::new(f, g, spec)?.with_reference(Reference::exact(
        -3.0,
        vec![0.0, 3.0, 0.0],
        vec![1.0, -2.0],
        vec![-1.0, 0.0, -2.0],
    ));
    Ok(ConicInstance { problem })
}

/// Composite `min ‖y − c‖ + (κ₁/2)‖y‖² + κ₂‖y‖₁` with `L = I`; `f` is
/// 1-Lipschitz.
#[derive(Debug, Clone)]
pub struct SqrtLossInstance {
    pub c: Vec<f64>,
    pub kappa1: f64,
    pub kappa2: f64,
    pub problem: CompositeProblem,
}

pub fn gen_sqrt_loss_composite(p: usize, kappa1: f64, kappa2: f64, seed: u64) -> Result<SqrtLossInstance> {
    if p == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let c: Vec<f64> = randn(&mut rng_stream(seed, S_CENTER), p).into_iter().map(|v| 3.0 * v).collect();
    let f = ProxFunction::l2_norm().centered(c.clone());
    let g = ProxFunction::elastic(kappa1, kappa2)?;
    let problem = CompositeProblem::new(f, g, LinearMap::identity(p))?.with_l_norm_sq(1.0);
    Ok(SqrtLossInstance {
        c,
        kappa1,
        kappa2,
        problem,
    })
}
