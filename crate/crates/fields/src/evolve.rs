//! Time stepping of discretized fields and their diagnostic series.

use std::io::{self, Write};

use metriplex_core::integrators::{step_count, step_with_slope};
use metriplex_core::{Method, MetriplexError, Result};

use crate::euler2d::Grid2D;
use crate::spectral::Grid1D;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveSettings {
    pub t_end: f64,
    pub dt: f64,
    pub method: Method,
    /// Record every `record_every`-th step; the final state is always recorded.
    pub record_every: usize,
}

impl EvolveSettings {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self { t_end, dt, method: Method::Rk4, record_every: 1 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite() && self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(MetriplexError::InvalidParameter(format!("need t_end > 0 and dt > 0, got t_end = {}, dt = {}", self.t_end, self.dt)));
        }
        if self.record_every == 0 {
            return Err(MetriplexError::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Functionals evaluated at each recorded state.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDiagnostics {
    pub energy: f64,
    pub entropy: f64,
    pub casimirs: Vec<f64>,
}

/// Diagnostic time series of a field run; state columns are replaced by
/// the `L²` norm and the maximum modulus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldSeries {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub max_abs: Vec<f64>,
    pub energy: Vec<f64>,
    pub entropy: Vec<f64>,
    pub casimir_names: Vec<String>,
    pub casimirs: Vec<Vec<f64>>,
    /// `L²` norm of the vector field.
    pub speed: Vec<f64>,
}

impl FieldSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max |H(t) − H(0)| / |H(0)|` over the recorded samples (absolute when `H(0) = 0`).
    pub fn energy_drift(&self) -> f64 {
        relative_drift(&self.energy)
    }

    /// Relative drift of Casimir `c`.
    pub fn casimir_drift(&self, c: usize) -> f64 {
        relative_drift(&self.casimirs.iter().map(|v| v[c]).collect::<Vec<_>>())
    }

    /// Largest decrease of the entropy between consecutive samples, 0 if none.
    pub fn max_entropy_decrease(&self) -> f64 {
        self.entropy.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }

    /// Largest increase of the energy between consecutive samples, 0 if none.
    pub fn max_energy_increase(&self) -> f64 {
        self.energy.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// CSV with header `t,l2,max_abs,H,S,C1..,speed`.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let mut header = vec!["t".to_string(), "l2".into(), "max_abs".into(), "H".into(), "S".into()];
        header.extend((1..=self.casimir_names.len()).map(|i| format!("C{i}")));
        header.push("speed".into());
        writeln!(w, "{}", header.join(","))?;
        for m in 0..self.len() {
            let mut row = vec![self.times[m], self.l2[m], self.max_abs[m], self.energy[m], self.entropy[m]];
            row.extend(&self.casimirs[m]);
            row.push(self.speed[m]);
            writeln!(w, "{}", row.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(","))?;
        }
        Ok(())
    }
}

fn relative_drift(v: &[f64]) -> f64 {
    let Some(&v0) = v.first() else { return 0.0 };
    let d = v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max);
    if v0 == 0.0 {
        d
    } else {
        d / v0.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldRun {
    pub series: FieldSeries,
    pub final_state: Vec<f64>,
}

/// Integrates `u_t = rhs(u)` with fixed steps `h = t_end / ⌈t_end/dt⌉`.
///
/// `cell` is the quadrature weight (`dx` or `dx·dy`) used for the norms.
pub fn evolve<F, D>(u0: &[f64], cell: f64, settings: &EvolveSettings, casimir_names: &[&str], mut rhs: F, mut diagnostics: D) -> Result<FieldRun>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
    D: FnMut(&[f64]) -> Result<FieldDiagnostics>,
{
    settings.validate()?;
    let steps = step_count(settings.t_end, settings.dt);
    let h = settings.t_end / steps as f64;
    let mut series = FieldSeries { casimir_names: casimir_names.iter().map(|s| s.to_string()).collect(), ..Default::default() };
    let mut record = |t: f64, u: &[f64], k: &[f64], series: &mut FieldSeries| -> Result<()> {
        let d = diagnostics(u)?;
        series.times.push(t);
        series.l2.push((u.iter().map(|x| x * x).sum::<f64>() * cell).sqrt());
        series.max_abs.push(u.iter().fold(0.0, |m: f64, x| m.max(x.abs())));
        series.energy.push(d.energy);
        series.entropy.push(d.entropy);
        series.casimirs.push(d.casimirs);
        series.speed.push((k.iter().map(|x| x * x).sum::<f64>() * cell).sqrt());
        Ok(())
    };
    let mut u = u0.to_vec();
    let mut k = rhs(&u)?;
    record(0.0, &u, &k, &mut series)?;
    for n in 1..=steps {
        let next = step_with_slope(settings.method, &mut rhs, &u, &k, h)?;
        let t = n as f64 * h;
        if next.iter().any(|x| !x.is_finite()) {
            return Err(MetriplexError::Diverged { time: t, last_state: u });
        }
        u = next;
        k = rhs(&u)?;
        if n % settings.record_every == 0 || n == steps {
            record(t, &u, &k, &mut series)?;
        }
    }
    Ok(FieldRun { series, final_state: u })
}

/// Snapshot CSV `x,u`.
pub fn write_snapshot_1d(grid: &Grid1D, u: &[f64], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "x,u")?;
    for (j, v) in u.iter().enumerate() {
        writeln!(w, "{:.16e},{:.16e}", grid.x(j), v)?;
    }
    Ok(())
}

/// Snapshot CSV `x,y,omega`.
pub fn write_snapshot_2d(grid: &Grid2D, omega: &[f64], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "x,y,omega")?;
    for (i, v) in omega.iter().enumerate() {
        let (x, y) = grid.point(i);
        writeln!(w, "{x:.16e},{y:.16e},{v:.16e}")?;
    }
    Ok(())
}
