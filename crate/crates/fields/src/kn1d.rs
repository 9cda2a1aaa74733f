//! Kulkarni–Nomizu 4-brackets for one field in one space dimension,
//!
//! `(F, K; G, N) = ∫ W [Σ(F,G)M(K,N) − Σ(F,N)M(K,G) + M(F,G)Σ(K,N) − M(F,N)Σ(K,G)]`
//!
//! with `M(a, b) = a b` and `Σ` one of two symmetric operators. The
//! dissipative vector field is `(u, S)_H = (u, H; S, H)`, assembled from the
//! exact grid adjoint of `Σ`, so the discrete bracket identities hold to
//! rounding.

use std::fmt;
use std::str::FromStr;

use metriplex_core::{MetriplexError, Result};

use crate::spectral::{FieldState1D, Grid1D};

/// The symmetric operator `Σ` of the bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaKind {
    /// `Σ(a, b) = −∂a ∂b`.
    Gradient,
    /// `Σ(a, b) = ∂a 𝓗[b] + ∂b 𝓗[a]`.
    Hilbert,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnBracket1D {
    grid: Grid1D,
    sigma: SigmaKind,
    weight: Vec<f64>,
}

impl KnBracket1D {
    /// Bracket with a spatially varying weight `W(x)` given at the grid points.
    pub fn new(grid: Grid1D, sigma: SigmaKind, weight: Vec<f64>) -> Result<Self> {
        if weight.len() != grid.n() {
            return Err(MetriplexError::DimensionMismatch { expected: grid.n(), found: weight.len() });
        }
        if weight.iter().any(|w| !w.is_finite()) {
            return Err(MetriplexError::NonFinite("bracket weight".into()));
        }
        Ok(Self { grid, sigma, weight })
    }

    pub fn with_constant_weight(grid: Grid1D, sigma: SigmaKind, w: f64) -> Result<Self> {
        let n = grid.n();
        Self::new(grid, sigma, vec![w; n])
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Pointwise `Σ(a, b)`.
    pub fn sigma(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        match self.sigma {
            SigmaKind::Gradient => {
                let (da, db) = (g.derivative(a, 1), g.derivative(b, 1));
                da.iter().zip(&db).map(|(x, y)| -x * y).collect()
            }
            SigmaKind::Hilbert => {
                let (da, db) = (g.derivative(a, 1), g.derivative(b, 1));
                let (ha, hb) = (g.hilbert(a), g.hilbert(b));
                (0..g.n()).map(|j| da[j] * hb[j] + db[j] * ha[j]).collect()
            }
        }
    }

    /// `Σ*_b[φ]`, defined by `⟨φ, Σ(a, b)⟩ = ⟨a, Σ*_b[φ]⟩` for all `a`.
    pub fn sigma_adjoint(&self, b: &[f64], phi: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        match self.sigma {
            // ∂ is skew on the grid: ⟨φ, −∂a ∂b⟩ = ⟨a, ∂(φ ∂b)⟩
            SigmaKind::Gradient => {
                let db = g.derivative(b, 1);
                g.derivative(&mul(phi, &db), 1)
            }
            // ∂ and 𝓗 are both skew
            SigmaKind::Hilbert => {
                let (db, hb) = (g.derivative(b, 1), g.hilbert(b));
                let p = g.derivative(&mul(phi, &hb), 1);
                let q = g.hilbert(&mul(phi, &db));
                p.iter().zip(&q).map(|(p, q)| -p - q).collect()
            }
        }
    }

    /// Discrete `(F, K; G, N)` from the functional derivatives at the grid points.
    pub fn bracket(&self, f: &[f64], k: &[f64], g: &[f64], n: &[f64]) -> f64 {
        let (sfg, skn, sfn, skg) = (self.sigma(f, g), self.sigma(k, n), self.sigma(f, n), self.sigma(k, g));
        let integrand: Vec<f64> = (0..self.grid.n())
            .map(|j| self.weight[j] * (sfg[j] * k[j] * n[j] - sfn[j] * k[j] * g[j] + f[j] * g[j] * skn[j] - f[j] * n[j] * skg[j]))
            .collect();
        self.grid.integrate(&integrand)
    }

    /// `(u, S)_H = (u, H; S, H)` from `H_u` and `S_u`.
    pub fn dissipative_rhs(&self, h_u: &[f64], s_u: &[f64]) -> Vec<f64> {
        let w = &self.weight;
        let nn = self.grid.n();
        let whh: Vec<f64> = (0..nn).map(|j| w[j] * h_u[j] * h_u[j]).collect();
        let whs: Vec<f64> = (0..nn).map(|j| w[j] * h_u[j] * s_u[j]).collect();
        let a = self.sigma_adjoint(s_u, &whh);
        let b = self.sigma_adjoint(h_u, &whs);
        let shh = self.sigma(h_u, h_u);
        let shs = self.sigma(h_u, s_u);
        (0..nn).map(|j| a[j] - b[j] + w[j] * (s_u[j] * shh[j] - h_u[j] * shs[j])).collect()
    }
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a * b).collect()
}

/// The three worked 1+1 dissipation mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipationKind {
    /// `H = ∫u`, `S = ½∫u²`, `Σ = −∂·∂`, `W = ν`: gives `ν∂²u`.
    Viscous,
    /// Gardner-bracket KdV energy `H`, `S = ∫u`, `Σ = −∂·∂`.
    KdvConserving,
    /// `H = ∫u`, `S = ½∫u²`, Hilbert `Σ`: gives `−2W𝓗[∂u]`.
    OttSudan,
}

impl DissipationKind {
    pub const ALL: [DissipationKind; 3] = [Self::Viscous, Self::KdvConserving, Self::OttSudan];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Viscous => "viscous",
            Self::KdvConserving => "kdv_conserving",
            Self::OttSudan => "ott_sudan",
        }
    }
}

impl fmt::Display for DissipationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DissipationKind {
    type Err = MetriplexError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| MetriplexError::InvalidParameter(format!("unknown dissipation kind '{s}' (expected viscous, kdv_conserving or ott_sudan)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params1D {
    /// Viscosity, the weight of the viscous kind.
    pub nu: f64,
    /// Constant weight `W` of the KdV and Ott–Sudan kinds.
    pub weight: f64,
    /// Frame speed `c` in the KdV energy.
    pub c: f64,
}

impl Default for Params1D {
    fn default() -> Self {
        Self { nu: 1.0, weight: 1.0, c: 0.0 }
    }
}

impl DissipationKind {
    fn bracket(self, grid: &Grid1D, p: &Params1D) -> Result<KnBracket1D> {
        let (sigma, w) = match self {
            Self::Viscous => (SigmaKind::Gradient, p.nu),
            Self::KdvConserving => (SigmaKind::Gradient, p.weight),
            Self::OttSudan => (SigmaKind::Hilbert, p.weight),
        };
        KnBracket1D::with_constant_weight(grid.clone(), sigma, w)
    }

    /// The conserved energy `H`.
    ///
    /// For the KdV kind `H = ∫(u³/6 − (∂u)²/2 + c u²/2)`, whose functional
    /// derivative is `c u + u²/2 + ∂²u`.
    pub fn hamiltonian(self, grid: &Grid1D, u: &[f64], p: &Params1D) -> f64 {
        match self {
            Self::Viscous | Self::OttSudan => grid.integrate(u),
            Self::KdvConserving => {
                let du = grid.derivative(u, 1);
                let e: Vec<f64> = (0..u.len()).map(|j| u[j].powi(3) / 6.0 - du[j] * du[j] / 2.0 + p.c * u[j] * u[j] / 2.0).collect();
                grid.integrate(&e)
            }
        }
    }

    /// Functional derivative of [`Self::hamiltonian`] on the grid.
    pub fn hamiltonian_gradient(self, grid: &Grid1D, u: &[f64], p: &Params1D) -> Vec<f64> {
        match self {
            Self::Viscous | Self::OttSudan => vec![1.0; u.len()],
            Self::KdvConserving => {
                let d2 = grid.derivative(&grid.derivative(u, 1), 1);
                (0..u.len()).map(|j| p.c * u[j] + u[j] * u[j] / 2.0 + d2[j]).collect()
            }
        }
    }

    /// The Casimir `S` that generates the dissipation (`½∫u²` or `∫u`).
    pub fn casimir(self, grid: &Grid1D, u: &[f64]) -> f64 {
        match self {
            Self::Viscous | Self::OttSudan => 0.5 * grid.inner(u, u),
            Self::KdvConserving => grid.integrate(u),
        }
    }

    pub fn casimir_gradient(self, u: &[f64]) -> Vec<f64> {
        match self {
            Self::Viscous | Self::OttSudan => u.to_vec(),
            Self::KdvConserving => vec![1.0; u.len()],
        }
    }

    /// Produced entropy, `−S`: with `W > 0` these brackets make `S` decrease.
    pub fn entropy(self, grid: &Grid1D, u: &[f64]) -> f64 {
        -self.casimir(grid, u)
    }

    pub fn entropy_gradient(self, u: &[f64]) -> Vec<f64> {
        self.casimir_gradient(u).into_iter().map(|x| -x).collect()
    }
}

/// Dissipative vector field `(u, S)_H` of the given kind.
pub fn dissipative_rhs_1d(kind: DissipationKind, grid: &Grid1D, u: &FieldState1D, params: &Params1D) -> Result<FieldState1D> {
    u.check(grid)?;
    let b = kind.bracket(grid, params)?;
    let h_u = kind.hamiltonian_gradient(grid, &u.u, params);
    let s_u = kind.casimir_gradient(&u.u);
    Ok(FieldState1D { u: b.dissipative_rhs(&h_u, &s_u) })
}

/// `Ṡ = −∫ W (∂H_u)²` of the KdV kind, the rate of change of `S = ∫u`.
pub fn kdv_dissipation(grid: &Grid1D, u: &FieldState1D, params: &Params1D) -> Result<f64> {
    u.check(grid)?;
    let h_u = DissipationKind::KdvConserving.hamiltonian_gradient(grid, &u.u, params);
    let d = grid.derivative(&h_u, 1);
    Ok(-params.weight * grid.inner(&d, &d))
}

/// Soliton `a·sech²(α(x − x₀))` with `a = 12α²`, stationary in the frame
/// moving with speed `c = −4α²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdvSoliton {
    pub alpha: f64,
    pub center: f64,
}

impl KdvSoliton {
    pub fn amplitude(&self) -> f64 {
        12.0 * self.alpha * self.alpha
    }

    pub fn frame_speed(&self) -> f64 {
        -4.0 * self.alpha * self.alpha
    }

    pub fn sample(&self, grid: &Grid1D) -> FieldState1D {
        let a = self.amplitude();
        grid.sample(|x| {
            let s = 1.0 / (self.alpha * (x - self.center)).cosh();
            a * s * s
        })
    }
}

fn require_positive(u: &[f64]) -> Result<()> {
    match u.iter().copied().find(|x| !(*x > 0.0)) {
        Some(x) => Err(MetriplexError::InvalidState(format!("the 1/u² bracket needs strictly positive data, found {x}"))),
        None => Ok(()),
    }
}

/// Hamiltonian flow `∂(u⁻²)` of the bracket with `h = 1/u²`, `H = ∫u`.
/// Defined only for strictly positive `u`.
pub fn inverse_square_hamiltonian_rhs(grid: &Grid1D, u: &FieldState1D) -> Result<FieldState1D> {
    u.check(grid)?;
    require_positive(&u.u)?;
    let inv: Vec<f64> = u.u.iter().map(|x| 1.0 / (x * x)).collect();
    Ok(FieldState1D { u: grid.derivative(&inv, 1) })
}

/// Full viscous metriplectic flow `∂(u⁻²) + ν∂²u`, positive data only.
pub fn viscous_metriplectic_rhs(grid: &Grid1D, u: &FieldState1D, nu: f64) -> Result<FieldState1D> {
    let h = inverse_square_hamiltonian_rhs(grid, u)?;
    let d = dissipative_rhs_1d(DissipationKind::Viscous, grid, u, &Params1D { nu, ..Params1D::default() })?;
    Ok(FieldState1D { u: h.u.iter().zip(&d.u).map(|(a, b)| a + b).collect() })
}
