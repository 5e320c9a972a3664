//! Economic Complexity Index.
//!
//! Two routes are provided. The method of reflections keeps the whole
//! sequence `k_{c,N}`, `k_{p,N}` so its dependence on `N` can be inspected.
//! The eigenvector route takes the eigenvector of the second-largest
//! eigenvalue of `D_c^-1 M D_p^-1 M^T`.
//!
//! Scores are standardized (mean 0, sample sd 1) and signed so that they
//! correlate non-negatively with diversity.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::math::{mean, pearson, sample_sd, sqrt, sum};

pub const DEFAULT_REFLECTION_ORDER: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EciMethod {
    Reflections,
    Eigenvector,
}

impl EciMethod {
    pub fn name(self) -> &'static str {
        match self {
            EciMethod::Reflections => "reflections",
            EciMethod::Eigenvector => "eigenvector",
        }
    }
}

/// How product scores are refreshed inside one reflection step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReflectionScheme {
    /// `k_{p,N}` averages the freshly computed `k_{c,N}`. Country and product
    /// sequences then follow a single chain started from ubiquity.
    #[default]
    Alternating,
    /// `k_{p,N}` averages `k_{c,N-1}`; two interleaved chains, one started
    /// from diversity and one from ubiquity.
    Simultaneous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EciResult {
    pub eci: Vec<f64>,
    pub method: EciMethod,
    /// Reflection order the scores were taken at.
    pub order: Option<usize>,
}

/// Full reflection sequence, indexed by `N = 0..=max_order`.
///
/// Every vector is held as a common offset plus mean-zero deviations, so the
/// spread between countries keeps full precision even after the values
/// themselves have converged to a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflections {
    pub scheme: ReflectionScheme,
    pub countries: Vec<Vec<f64>>,
    pub products: Vec<Vec<f64>>,
    country_dev: Vec<Vec<f64>>,
    /// Whether the chain feeding `k_{c,N}` starts from a constant vector.
    country_chain_flat: Vec<bool>,
}

#[derive(Debug, Clone)]
struct Centered {
    offset: f64,
    dev: Vec<f64>,
}

impl Centered {
    fn new(v: &[f64]) -> Self {
        let offset = mean(v);
        Self {
            offset,
            dev: v.iter().map(|x| x - offset).collect(),
        }
    }

    /// Re-centres deviations produced by a row-stochastic operator.
    fn from_parts(offset: f64, raw_dev: Vec<f64>) -> Self {
        let shift = mean(&raw_dev);
        Self {
            offset: offset + shift,
            dev: raw_dev.into_iter().map(|x| x - shift).collect(),
        }
    }

    fn values(&self) -> Vec<f64> {
        self.dev.iter().map(|d| self.offset + d).collect()
    }
}

fn is_flat(v: &[f64]) -> bool {
    let m = mean(v);
    let scale = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    v.iter().all(|x| (x - m).abs() <= 1e-12 * scale)
}

fn check_lines(m: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::DimensionMismatch {
            what: "adjacency matrix",
            expected: "at least 1x1".into(),
            found: alloc::format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    if let Some((k, v)) = m.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::NegativeEntry {
            matrix: "adjacency",
            row: k % m.nrows(),
            col: k / m.nrows(),
            value: *v,
        });
    }
    let kc: Vec<f64> = m.row_iter().map(|r| sum(r.iter().copied())).collect();
    let kp: Vec<f64> = m.column_iter().map(|c| sum(c.iter().copied())).collect();
    if let Some(c) = kc.iter().position(|&v| v == 0.0) {
        return Err(Error::EmptyLine { what: "country", index: c });
    }
    if let Some(p) = kp.iter().position(|&v| v == 0.0) {
        return Err(Error::EmptyLine { what: "product", index: p });
    }
    Ok((kc, kp))
}

/// Runs the method of reflections up to `max_order`.
pub fn reflections(m: &DMatrix<f64>, max_order: usize, scheme: ReflectionScheme) -> Result<Reflections> {
    let (kc0, kp0) = check_lines(m)?;
    let (nc, np) = m.shape();
    // Both averaging operators are row-stochastic, so a constant offset
    // passes through unchanged and only deviations need propagating.
    let country_step = |kp: &Centered| -> Centered {
        let raw = (0..nc)
            .map(|c| sum((0..np).map(|p| m[(c, p)] * kp.dev[p])) / kc0[c])
            .collect();
        Centered::from_parts(kp.offset, raw)
    };
    let product_step = |kc: &Centered| -> Centered {
        let raw = (0..np)
            .map(|p| sum((0..nc).map(|c| m[(c, p)] * kc.dev[c])) / kp0[p])
            .collect();
        Centered::from_parts(kc.offset, raw)
    };

    let diversity_flat = is_flat(&kc0);
    let ubiquity_flat = is_flat(&kp0);
    let mut c_state = vec![Centered::new(&kc0)];
    let mut p_state = vec![Centered::new(&kp0)];
    let mut country_chain_flat = vec![diversity_flat];
    for n in 1..=max_order {
        let kc = country_step(&p_state[n - 1]);
        let kp = match scheme {
            ReflectionScheme::Alternating => product_step(&kc),
            ReflectionScheme::Simultaneous => product_step(&c_state[n - 1]),
        };
        country_chain_flat.push(match scheme {
            ReflectionScheme::Alternating => ubiquity_flat,
            ReflectionScheme::Simultaneous if n % 2 == 1 => ubiquity_flat,
            ReflectionScheme::Simultaneous => diversity_flat,
        });
        c_state.push(kc);
        p_state.push(kp);
    }
    Ok(Reflections {
        scheme,
        countries: c_state.iter().map(Centered::values).collect(),
        products: p_state.iter().map(Centered::values).collect(),
        country_dev: c_state.into_iter().map(|c| c.dev).collect(),
        country_chain_flat,
    })
}

impl Reflections {
    pub fn max_order(&self) -> usize {
        self.countries.len() - 1
    }

    /// Standardized country scores at order `n`.
    pub fn eci(&self, n: usize) -> Result<EciResult> {
        let dev = self.country_dev.get(n).ok_or_else(|| Error::InvalidParameter {
            name: "order",
            reason: alloc::format!("{n} exceeds computed order {}", self.max_order()),
        })?;
        let degenerate = |msg: &str| Error::Degenerate(alloc::format!("k_c at N={n}: {msg}"));
        if self.country_chain_flat[n] {
            return Err(degenerate("all countries have equal scores"));
        }
        let eci = standardize(dev, &self.countries[0]).map_err(|e| match e {
            Error::Degenerate(msg) => degenerate(&msg),
            other => other,
        })?;
        Ok(EciResult {
            eci,
            method: EciMethod::Reflections,
            order: Some(n),
        })
    }
}

/// Reflections at a single order with the default scheme.
pub fn eci_reflections(m: &DMatrix<f64>, order: usize) -> Result<(Reflections, EciResult)> {
    let r = reflections(m, order, ReflectionScheme::default())?;
    let eci = r.eci(order)?;
    Ok((r, eci))
}

/// Z-scores with the sign chosen so correlation with `diversity` is ≥ 0.
/// When that correlation is zero the sign is left as computed.
pub fn standardize(raw: &[f64], diversity: &[f64]) -> Result<Vec<f64>> {
    if raw.len() < 2 {
        return Err(Error::Degenerate(String::from(
            "at least two countries are needed to standardize",
        )));
    }
    let m = mean(raw);
    let sd = sample_sd(raw);
    let scale = raw.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if !(sd > 1e-10 * scale) {
        return Err(Error::Degenerate(String::from("all countries have equal scores")));
    }
    let mut z: Vec<f64> = raw.iter().map(|v| (v - m) / sd).collect();
    if pearson(&z, diversity) < 0.0 {
        for v in z.iter_mut() {
            *v = -*v;
        }
    }
    Ok(z)
}

/// Whether every column sums to one within `tol`.
pub fn is_column_stochastic(m: &DMatrix<f64>, tol: f64) -> bool {
    m.ncols() > 0
        && m.column_iter()
            .all(|c| (sum(c.iter().copied()) - 1.0).abs() <= tol)
}

/// Connected components of the country-product bipartite graph, as lists
/// of country indices. Products are attached through shared countries.
pub fn country_components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let (nc, np) = m.shape();
    let mut parent: Vec<usize> = (0..nc + np).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in 0..nc {
        for p in 0..np {
            if m[(c, p)] != 0.0 {
                let a = find(&mut parent, c);
                let b = find(&mut parent, nc + p);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for c in 0..nc {
        let root = find(&mut parent, c);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(c),
            None => groups.push((root, vec![c])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Eigenvector ECI. Zero product columns are ignored; a country with no
/// products or a disconnected bipartite graph is an error.
pub fn eci_eigenvector(m: &DMatrix<f64>) -> Result<EciResult> {
    let keep: Vec<usize> = (0..m.ncols())
        .filter(|&p| m.column(p).iter().any(|v| *v != 0.0))
        .collect();
    if keep.is_empty() {
        return Err(Error::AllZero("adjacency matrix"));
    }
    let m = m.select_columns(keep.iter());
    let (kc, kp) = check_lines(&m)?;
    let components = country_components(&m);
    if components.len() > 1 {
        return Err(Error::Reducible(components));
    }
    let nc = m.nrows();
    if nc < 2 {
        return Err(Error::Degenerate(String::from(
            "at least two countries are needed",
        )));
    }

    // Symmetric similarity: D_c^-1/2 M D_p^-1 M^T D_c^-1/2.
    let mut scaled = m.clone();
    for (p, mut col) in scaled.column_iter_mut().enumerate() {
        col /= sqrt(kp[p]);
    }
    for (c, mut row) in scaled.row_iter_mut().enumerate() {
        row /= sqrt(kc[c]);
    }
    let sym = &scaled * scaled.transpose();
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let l2 = eig.eigenvalues[order[1]];
    if nc > 2 {
        let l3 = eig.eigenvalues[order[2]];
        if (l2 - l3).abs() < 1e-10 {
            return Err(Error::Degenerate(alloc::format!(
                "second eigenvalue {l2} is not simple"
            )));
        }
    }
    let u = eig.eigenvectors.column(order[1]);
    let raw: Vec<f64> = (0..nc).map(|c| u[c] / sqrt(kc[c])).collect();
    Ok(EciResult {
        eci: standardize(&raw, &kc)?,
        method: EciMethod::Eigenvector,
        order: None,
    })
}
