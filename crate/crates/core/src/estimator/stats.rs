use crate::constraints::ConstraintSet;
use crate::data::Sample;
use crate::error::{Error, Result};
use crate::families::ParametricFamily;
use crate::quadrature::QuadOptions;

/// Where expectations under P_T come from beyond the first two moments of g.
#[derive(Debug, Clone, PartialEq)]
pub enum StatsSource {
    /// Only ḡ and the Gram matrix are available.
    MomentsOnly,
    /// The raw sample is retained.
    Sample(Sample),
    /// An exact mixture of fully specified components, with weights.
    Population(Vec<(f64, ParametricFamily)>),
}

/// Empirical moments of g needed by the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    /// (1/n) Σ g(Xᵢ), length ℓ+1.
    pub gbar: Vec<f64>,
    /// (1/n) Σ g(Xᵢ) g(Xᵢ)ᵗ, row-major (ℓ+1)².
    pub gg_bar: Vec<f64>,
    pub source: StatsSource,
}

impl SampleStats {
    pub fn len(&self) -> usize {
        self.gbar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gbar.is_empty()
    }

    /// Var(g) estimate ḡḡ − ḡ ḡᵗ.
    pub fn covariance_g(&self) -> Vec<f64> {
        let k = self.len();
        let mut v = self.gg_bar.clone();
        for i in 0..k {
            for j in 0..k {
                v[i * k + j] -= self.gbar[i] * self.gbar[j];
            }
        }
        v
    }

    /// Exact moments of a mixture of fully specified components, as if the
    /// sample were infinite. `n` is the nominal sample size reported to the
    /// asymptotics.
    pub fn population(
        components: &[(f64, ParametricFamily)],
        cs: &ConstraintSet,
        n: usize,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyInput("population needs at least one component"));
        }
        let k = cs.len();
        let mut gbar = vec![0.0; k];
        let mut gg_bar = vec![0.0; k * k];
        let mut exps = vec![0u32; cs.dim()];
        for (w, fam) in components {
            if fam.theta_dim() != 0 {
                return Err(Error::Parameter("population components must be fully specified".into()));
            }
            if fam.dim() != cs.dim() {
                return Err(Error::Dimension("component and constraint dimensions differ".into()));
            }
            for i in 0..k {
                gbar[i] += w * fam.moment(&[], cs.exponents(i))?;
                for j in i..k {
                    for (t, e) in exps.iter_mut().enumerate() {
                        *e = cs.exponents(i)[t] + cs.exponents(j)[t];
                    }
                    let v = w * fam.moment(&[], &exps)?;
                    gg_bar[i * k + j] += v;
                    if j != i {
                        gg_bar[j * k + i] += v;
                    }
                }
            }
        }
        Ok(Self {
            n,
            gbar,
            gg_bar,
            source: StatsSource::Population(components.to_vec()),
        })
    }

    /// Sum of weighted terms over the source: for each observation x calls
    /// `f(x, g(x), out)` and averages. Population sources integrate.
    pub(crate) fn average<F>(&self, cs: &ConstraintSet, dim_out: usize, mut f: F, quad: &QuadOptions) -> Result<Vec<f64>>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        match &self.source {
            StatsSource::MomentsOnly => Err(Error::Unsupported(
                "this divergence needs the raw sample; stats were computed without it".into(),
            )),
            StatsSource::Sample(s) => {
                let mut acc = vec![0.0; dim_out];
                let mut buf = vec![0.0; dim_out];
                let mut g = vec![0.0; cs.len()];
                for x in s.points() {
                    cs.eval_g_into(x, &mut g);
                    buf.iter_mut().for_each(|v| *v = 0.0);
                    f(&g, &mut buf);
                    for (a, b) in acc.iter_mut().zip(&buf) {
                        *a += b;
                    }
                }
                let inv = 1.0 / s.len() as f64;
                acc.iter_mut().for_each(|v| *v *= inv);
                Ok(acc)
            }
            StatsSource::Population(parts) => {
                let mut acc = vec![0.0; dim_out];
                let mut g = vec![0.0; cs.len()];
                for (w, fam) in parts {
                    let part = fam.expect(
                        &[],
                        dim_out,
                        |x, out| {
                            cs.eval_g_into(x, &mut g);
                            f(&g, out);
                        },
                        quad,
                    )?;
                    for (a, b) in acc.iter_mut().zip(part) {
                        *a += w * b;
                    }
                }
                Ok(acc)
            }
        }
    }
}

/// One pass over the sample accumulating ḡ and the Gram matrix.
pub fn compute_stats(sample: &Sample, cs: &ConstraintSet) -> Result<SampleStats> {
    let mut stats = accumulate(sample, cs)?;
    stats.source = StatsSource::MomentsOnly;
    Ok(stats)
}

/// As [`compute_stats`], keeping the sample for non-χ² divergences.
pub fn compute_stats_retained(sample: &Sample, cs: &ConstraintSet) -> Result<SampleStats> {
    let mut stats = accumulate(sample, cs)?;
    stats.source = StatsSource::Sample(sample.clone());
    Ok(stats)
}

fn accumulate(sample: &Sample, cs: &ConstraintSet) -> Result<SampleStats> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("sample is empty"));
    }
    if sample.dim() != cs.dim() {
        return Err(Error::Dimension(format!(
            "{}-variate sample for {}-variate constraints",
            sample.dim(),
            cs.dim()
        )));
    }
    let k = cs.len();
    let mut gbar = vec![0.0; k];
    let mut upper = vec![0.0; k * (k + 1) / 2];
    let mut g = vec![0.0; k];
    for x in sample.points() {
        cs.eval_g_into(x, &mut g);
        let mut t = 0;
        for i in 0..k {
            gbar[i] += g[i];
            for j in i..k {
                upper[t] += g[i] * g[j];
                t += 1;
            }
        }
    }
    let n = sample.len();
    let inv = 1.0 / n as f64;
    gbar.iter_mut().for_each(|v| *v *= inv);
    let mut gg_bar = vec![0.0; k * k];
    let mut t = 0;
    for i in 0..k {
        for j in i..k {
            let v = upper[t] * inv;
            gg_bar[i * k + j] = v;
            gg_bar[j * k + i] = v;
            t += 1;
        }
    }
    // g₀ ≡ 1 makes these exact; pin them against roundoff.
    gbar[0] = 1.0;
    gg_bar[0] = 1.0;
    for j in 1..k {
        gg_bar[j] = gbar[j];
        gg_bar[j * k] = gbar[j];
    }
    Ok(SampleStats {
        n,
        gbar,
        gg_bar,
        source: StatsSource::MomentsOnly,
    })
}
