use crate::brackets::StructureConstants;
use crate::error::{MetriplexError, Result};
use crate::field::{ConstantFourBracket, Definiteness, FourBracketFlags};
use crate::tensor::{check_dims, cyclic_part, Rank2Value, Rank4Value, SymmetryTag, DEFAULT_ATOL};

fn require_symmetric(m: &Rank2Value, name: &str) -> Result<()> {
    let defect = m.symmetry_defect();
    if defect > DEFAULT_ATOL {
        return Err(MetriplexError::SymmetryViolation { what: format!("symmetry of {name}"), defect, tolerance: DEFAULT_ATOL });
    }
    Ok(())
}

/// Kulkarni–Nomizu product
/// `σ^{ik}μ^{jl} − σ^{il}μ^{jk} + μ^{ik}σ^{jl} − μ^{il}σ^{jk}`.
pub fn kn_product(sigma: &Rank2Value, mu: &Rank2Value) -> Result<Rank4Value> {
    check_dims(sigma.dim(), &[mu.dim()])?;
    require_symmetric(sigma, "sigma")?;
    require_symmetric(mu, "mu")?;
    let (s, m) = (sigma.symmetrized(), mu.symmetrized());
    Ok(Rank4Value::from_fn(s.dim(), |i, j, k, l| {
        s.get(i, k) * m.get(j, l) - s.get(i, l) * m.get(j, k) + m.get(i, k) * s.get(j, l) - m.get(i, l) * s.get(j, k)
    }))
}

/// Constant-curvature tensor `K (g^{ik}g^{jl} − g^{il}g^{jk})`.
pub fn space_form(g: &Rank2Value, k: f64) -> Result<Rank4Value> {
    require_symmetric(g, "g")?;
    let g = g.symmetrized();
    Ok(Rank4Value::from_fn(g.dim(), |i, j, a, b| k * (g.get(i, a) * g.get(j, b) - g.get(i, b) * g.get(j, a))))
}

/// `A^{ijkl} = c^{ij}_r c^{kl}_s g^{rs}`: minimal metriplectic, generally
/// not cyclic.
pub fn lie_algebra_4tensor(c: &StructureConstants, g: &Rank2Value) -> Result<Rank4Value> {
    check_dims(c.dim(), &[g.dim()])?;
    require_symmetric(g, "g")?;
    let n = c.dim();
    // w^{ij}_s = c^{ij}_r g^{rs}
    let mut w = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for s in 0..n {
                w[(i * n + j) * n + s] = (0..n).map(|r| c.get(i, j, r) * g.get(r, s)).sum();
            }
        }
    }
    Ok(Rank4Value::from_fn(n, |i, j, k, l| (0..n).map(|s| w[(i * n + j) * n + s] * c.get(k, l, s)).sum()))
}

/// `R = A − T`, the unique algebraic-curvature tensor inducing the same
/// 2-brackets as `A`.
pub fn torsion_removal(a: &Rank4Value) -> Result<Rank4Value> {
    let t = cyclic_part(a, DEFAULT_ATOL)?;
    Ok(a - &t)
}

/// Lie-metriplectic 4-bracket: the torsion-free part of
/// `c^{ij}_r c^{kl}_s g^{rs}`, flagged psd when `g` is.
pub fn lie_metriplectic_bracket(c: &StructureConstants, g: &Rank2Value) -> Result<ConstantFourBracket> {
    let r = torsion_removal(&lie_algebra_4tensor(c, g)?)?;
    let psd = Definiteness::classify(g).is_psd();
    Ok(ConstantFourBracket::new(r, FourBracketFlags { algebraic: true, psd }))
}

/// Cartan–Killing form `g^{rs} = λ c^{rm}_n c^{sn}_m`.
pub fn cartan_killing(c: &StructureConstants, lambda: f64) -> Rank2Value {
    let n = c.dim();
    let raw = Rank2Value::from_fn(n, SymmetryTag::None, |r, s| {
        let mut acc = 0.0;
        for m in 0..n {
            for k in 0..n {
                acc += c.get(r, m, k) * c.get(s, k, m);
            }
        }
        lambda * acc
    });
    raw.symmetrized()
}

/// Torsion-free 4-tensor of a semisimple algebra with its Cartan–Killing
/// metric, `g_CK^{rs} c^{ij}_r c^{kl}_s`.
///
/// Ad-invariance of `g_CK` makes this tensor cyclic already. `λ = −1/2`
/// normalizes `so(3)` to `g_CK = δ`.
pub fn ck_4tensor(c: &StructureConstants, lambda: f64) -> Result<Rank4Value> {
    let g = cartan_killing(c, lambda);
    // non-semisimple algebras have a degenerate Killing form
    g.inverse()?;
    lie_algebra_4tensor(c, &g)
}

/// The torsion-free representative written out directly,
/// `g^{rs}/3 (2c^{ij}_r c^{kl}_s + c^{ik}_r c^{jl}_s − c^{il}_r c^{jk}_s)`.
pub fn b_tensor(c: &StructureConstants, g: &Rank2Value) -> Result<Rank4Value> {
    check_dims(c.dim(), &[g.dim()])?;
    require_symmetric(g, "g")?;
    let n = c.dim();
    let pair = |a: usize, b: usize, p: usize, q: usize| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            let car = c.get(a, b, r);
            if car == 0.0 {
                continue;
            }
            for t in 0..n {
                s += car * c.get(p, q, t) * g.get(r, t);
            }
        }
        s
    };
    Ok(Rank4Value::from_fn(n, |i, j, k, l| (2.0 * pair(i, j, k, l) + pair(i, k, j, l) - pair(i, l, j, k)) / 3.0))
}
