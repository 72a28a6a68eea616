//! Explicit Lawson Runge-Kutta stepping for `dU/dt = L U + N(U)`.

use crate::error::{Error, Result};

/// Minimal vector-space operations required from a model state.
pub trait LinearSpace: Clone {
    /// `self += a * x`.
    fn axpy(&mut self, a: f64, x: &Self);
    /// `self *= a`.
    fn scale(&mut self, a: f64);
}

impl LinearSpace for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
    fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|s| *s *= a);
    }
}

/// A semi-linear system whose linear part is integrated exactly.
pub trait LawsonModel {
    type State: LinearSpace;

    /// Step size the exponentials were prepared for.
    fn dt(&self) -> f64;

    /// `exp(frac * dt * L) u`. Fractions outside the prepared set are a configuration error.
    fn exp_l(&self, frac: f64, u: &Self::State) -> Result<Self::State>;

    /// `N(u)`.
    fn nonlinear(&self, u: &Self::State) -> Result<Self::State>;
}

/// Coefficients of an explicit Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub name: String,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

const FRAC_EPS: f64 = 1e-13;

impl ButcherTableau {
    pub fn new(name: &str, a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let t = Self {
            name: name.to_string(),
            a,
            b,
            c,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn euler() -> Self {
        Self {
            name: "euler".into(),
            a: vec![vec![0.0]],
            b: vec![1.0],
            c: vec![0.0],
        }
    }

    /// Three-stage, third-order strong-stability-preserving method.
    pub fn ssp_rk33() -> Self {
        Self {
            name: "rk33".into(),
            a: vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.25, 0.25, 0.0],
            ],
            b: vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            c: vec![0.0, 1.0, 0.5],
        }
    }

    /// Kutta's third-order method.
    pub fn kutta_rk3() -> Self {
        Self {
            name: "kutta3".into(),
            a: vec![
                vec![0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0],
                vec![-1.0, 2.0, 0.0],
            ],
            b: vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 1.0],
        }
    }

    /// Classical fourth-order method.
    pub fn rk44() -> Self {
        Self {
            name: "rk44".into(),
            a: vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    /// Look up a built-in tableau by name (`euler`, `rk33`, `kutta3`, `rk44`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "euler" | "rk1" => Ok(Self::euler()),
            "rk33" | "ssprk3" | "ssp-rk33" => Ok(Self::ssp_rk33()),
            "kutta3" | "rk3" => Ok(Self::kutta_rk3()),
            "rk44" | "rk4" => Ok(Self::rk44()),
            other => Err(Error::Config(format!(
                "unknown tableau '{other}' (expected euler, rk33, kutta3 or rk44)"
            ))),
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Check shape, explicitness and the consistency conditions.
    pub fn validate(&self) -> Result<()> {
        let s = self.b.len();
        if s == 0 || self.c.len() != s || self.a.len() != s || self.a.iter().any(|r| r.len() != s) {
            return Err(Error::Config(format!(
                "tableau '{}' has inconsistent sizes",
                self.name
            )));
        }
        for i in 0..s {
            if self.a[i][i..].iter().any(|&x| x != 0.0) {
                return Err(Error::Config(format!(
                    "tableau '{}' is not explicit",
                    self.name
                )));
            }
            let row: f64 = self.a[i].iter().sum();
            if (row - self.c[i]).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "tableau '{}': c[{i}] != sum_j a[{i}][j]",
                    self.name
                )));
            }
        }
        let sb: f64 = self.b.iter().sum();
        if (sb - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "tableau '{}': weights do not sum to one",
                self.name
            )));
        }
        Ok(())
    }

    /// Every nonzero time fraction at which the stepper evaluates the linear exponential.
    pub fn fractions(&self) -> Vec<f64> {
        let s = self.stages();
        let mut out = vec![1.0];
        let mut push = |f: f64| {
            if f.abs() > FRAC_EPS && !out.iter().any(|&g| (g - f).abs() <= FRAC_EPS) {
                out.push(f);
            }
        };
        for i in 0..s {
            push(self.c[i]);
            for j in 0..i {
                if self.a[i][j] != 0.0 {
                    push(self.c[i] - self.c[j]);
                }
            }
            if self.b[i] != 0.0 {
                push(1.0 - self.c[i]);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

/// Euler, SSP-RK(3,3) and classical RK(4,4).
pub fn builtin_tableaux() -> Vec<ButcherTableau> {
    vec![
        ButcherTableau::euler(),
        ButcherTableau::ssp_rk33(),
        ButcherTableau::rk44(),
    ]
}

/// Accumulate `sum_g exp(frac_g) (sum of terms in group g)`, grouping equal fractions.
fn combine<M: LawsonModel>(model: &M, terms: Vec<(f64, f64, &M::State)>) -> Result<M::State> {
    let mut groups: Vec<(f64, M::State)> = Vec::new();
    for (frac, coef, x) in terms {
        if coef == 0.0 {
            continue;
        }
        match groups
            .iter_mut()
            .find(|(f, _)| (f - frac).abs() <= FRAC_EPS)
        {
            Some((_, acc)) => acc.axpy(coef, x),
            None => {
                let mut acc = x.clone();
                if coef != 1.0 {
                    acc.scale(coef);
                }
                groups.push((frac, acc));
            }
        }
    }
    let mut total: Option<M::State> = None;
    for (frac, acc) in groups {
        let y = if frac.abs() <= FRAC_EPS {
            acc
        } else {
            model.exp_l(frac, &acc)?
        };
        match total.as_mut() {
            None => total = Some(y),
            Some(t) => t.axpy(1.0, &y),
        }
    }
    total.ok_or_else(|| Error::Numerical("empty Lawson combination".into()))
}

/// One Lawson step:
/// `K_i = N(exp(c_i dt L) U + dt sum_j a_ij exp((c_i - c_j) dt L) K_j)`,
/// `U' = exp(dt L) U + dt sum_i b_i exp((1 - c_i) dt L) K_i`.
pub fn lawson_step<M: LawsonModel>(
    model: &M,
    tableau: &ButcherTableau,
    u: &M::State,
    dt: f64,
) -> Result<M::State> {
    if (dt - model.dt()).abs() > 1e-14 * dt.abs().max(1.0) {
        return Err(Error::Config(format!(
            "step {dt} differs from the step {} the exponentials were built for",
            model.dt()
        )));
    }
    let s = tableau.stages();
    let mut ks: Vec<M::State> = Vec::with_capacity(s);
    for i in 0..s {
        let mut terms = vec![(tableau.c[i], 1.0, u)];
        for (j, kj) in ks.iter().enumerate() {
            terms.push((tableau.c[i] - tableau.c[j], dt * tableau.a[i][j], kj));
        }
        let stage = combine(model, terms)?;
        ks.push(model.nonlinear(&stage)?);
    }
    let mut terms = vec![(1.0, 1.0, u)];
    for (i, ki) in ks.iter().enumerate() {
        terms.push((1.0 - tableau.c[i], dt * tableau.b[i], ki));
    }
    combine(model, terms)
}
