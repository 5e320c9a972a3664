//! Generators and reference implementations shared by the integration tests.
//!
//! The reference implementations deliberately avoid the library's code paths:
//! plain loops over `Vec<Vec<f64>>`, no factorizations unless stated.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vxf_core::{CountryRegistry, DMatrix, DVector, IoOptions, IoTable, SectorRegistry};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn country_codes(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let b = [b'A' + (i / 26 / 26 % 26) as u8, b'A' + (i / 26 % 26) as u8, b'A' + (i % 26) as u8];
            String::from_utf8(b.to_vec()).unwrap()
        })
        .collect()
}

pub fn sector_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("S{i:02}")).collect()
}

/// Non-negative matrix with roughly `zero_share` zeros and no empty line.
pub fn random_nonneg(rng: &mut impl Rng, rows: usize, cols: usize, zero_share: f64) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(rows, cols, |_, _| {
        if rng.random::<f64>() < zero_share {
            0.0
        } else {
            rng.random_range(0.01..1.0)
        }
    });
    for r in 0..rows {
        if m.row(r).iter().all(|v| *v == 0.0) {
            let c = rng.random_range(0..cols);
            m[(r, c)] = rng.random_range(0.01..1.0);
        }
    }
    for c in 0..cols {
        if m.column(c).iter().all(|v| *v == 0.0) {
            let r = rng.random_range(0..rows);
            m[(r, c)] = rng.random_range(0.01..1.0);
        }
    }
    m
}

pub fn column_stochastic(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut w = m.clone();
    for mut col in w.column_iter_mut() {
        let s: f64 = col.iter().sum();
        col /= s;
    }
    w
}

/// A balanced table with column sums of `A` at most `max_col_sum`, so the
/// spectral radius of `A` stays below it. Gross output is derived from
/// `x = (I - A)^-1 F 1` by a fixed-point loop.
pub fn random_iot(rng: &mut impl Rng, nc: usize, ns: usize, max_col_sum: f64) -> IoTable {
    let n = nc * ns;
    let mut a = vec![vec![0.0; n]; n];
    for j in 0..n {
        let target = rng.random_range(0.05..max_col_sum);
        let raw: Vec<f64> = (0..n)
            .map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() })
            .collect();
        let s: f64 = raw.iter().sum();
        for i in 0..n {
            a[i][j] = if s > 0.0 { raw[i] / s * target } else { 0.0 };
        }
    }
    let f: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..nc).map(|_| rng.random_range(0.5..10.0)).collect())
        .collect();
    let fd: Vec<f64> = f.iter().map(|r| r.iter().sum()).collect();
    let mut x = fd.clone();
    for _ in 0..2000 {
        x = (0..n)
            .map(|i| fd[i] + (0..n).map(|j| a[i][j] * x[j]).sum::<f64>())
            .collect();
    }
    let z = DMatrix::from_fn(n, n, |i, j| a[i][j] * x[j]);
    // Close both identities exactly up to rounding.
    let x: Vec<f64> = (0..n)
        .map(|i| z.row(i).iter().sum::<f64>() + fd[i])
        .collect();
    let va: Vec<f64> = (0..n).map(|j| x[j] - z.column(j).iter().sum::<f64>()).collect();
    IoTable::from_parts(
        2014,
        CountryRegistry::new(country_codes(nc)).unwrap(),
        SectorRegistry::new(sector_ids(ns)).unwrap(),
        z,
        DMatrix::from_fn(n, nc, |i, d| f[i][d]),
        DVector::from_vec(va),
        DVector::from_vec(x),
        &IoOptions::default(),
    )
    .unwrap()
}

/// `sum_{k < terms} A^k`, by repeated dense multiplication in plain loops.
pub fn leontief_series(a: &DMatrix<f64>, terms: usize) -> Vec<Vec<f64>> {
    let n = a.nrows();
    let mut power: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    let mut total = power.clone();
    for _ in 1..terms {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                let p = power[i][k];
                if p != 0.0 {
                    for j in 0..n {
                        next[i][j] += p * a[(k, j)];
                    }
                }
            }
        }
        power = next;
        for i in 0..n {
            for j in 0..n {
                total[i][j] += power[i][j];
            }
        }
    }
    total
}

/// Value-added exports from first principles with a truncated Leontief series.
pub fn vax_oracle(iot: &IoTable, terms: usize) -> Vec<Vec<f64>> {
    let n = iot.n_activities();
    let x = iot.gross_output();
    let z = iot.intermediate();
    let a = DMatrix::from_fn(n, n, |i, j| if x[j] != 0.0 { z[(i, j)] / x[j] } else { 0.0 });
    let b = leontief_series(&a, terms);
    let v: Vec<f64> = (0..n)
        .map(|j| if x[j] != 0.0 { iot.value_added()[j] / x[j] } else { 0.0 })
        .collect();
    let nc = iot.countries().len();
    let ns = iot.sectors().len();
    let f = iot.final_demand();
    let mut out = vec![vec![0.0; ns]; nc];
    for c in 0..nc {
        for s in 0..ns {
            let i = c * ns + s;
            let mut acc = 0.0;
            for d in (0..nc).filter(|&d| d != c) {
                for j in 0..n {
                    acc += b[i][j] * f[(j, d)];
                }
            }
            out[c][s] = v[i] * acc;
        }
    }
    out
}

/// Double-double number (`hi + lo`), enough for a quad-width accumulator.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = Self::two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = Self::two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = Self::two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from(-q1)));
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::from(-q2)));
        let q3 = r.hi / o.hi;
        Dd::from(q1).add(Dd::from(q2)).add(Dd::from(q3))
    }
}

/// Fitness-complexity fixed point by a fixed number of plain steps in
/// double-double arithmetic.
pub fn fitness_oracle(m: &DMatrix<f64>, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let (nc, ns) = m.shape();
    let mut f = vec![Dd::from(1.0); nc];
    let mut q = vec![Dd::from(1.0); ns];
    let normalize = |v: &mut Vec<Dd>| {
        let mut s = Dd::ZERO;
        for x in v.iter() {
            s = s.add(*x);
        }
        let mean = s.div(Dd::from(v.len() as f64));
        for x in v.iter_mut() {
            *x = x.div(mean);
        }
    };
    for _ in 0..steps {
        let mut nf = vec![Dd::ZERO; nc];
        for c in 0..nc {
            for s in 0..ns {
                nf[c] = nf[c].add(Dd::from(m[(c, s)]).mul(q[s]));
            }
        }
        let mut nq = vec![Dd::ZERO; ns];
        for s in 0..ns {
            let mut acc = Dd::ZERO;
            for c in 0..nc {
                acc = acc.add(Dd::from(m[(c, s)]).div(f[c]));
            }
            nq[s] = Dd::from(1.0).div(acc);
        }
        normalize(&mut nf);
        normalize(&mut nq);
        f = nf;
        q = nq;
    }
    (f.iter().map(|d| d.hi + d.lo).collect(), q.iter().map(|d| d.hi + d.lo).collect())
}

/// Reflections in the textbook form, one explicit loop per step, product
/// scores averaging the country scores of the same order.
pub fn reflections_oracle(m: &DMatrix<f64>, order: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (nc, np) = m.shape();
    let kc0: Vec<f64> = (0..nc).map(|c| (0..np).map(|p| m[(c, p)]).sum()).collect();
    let kp0: Vec<f64> = (0..np).map(|p| (0..nc).map(|c| m[(c, p)]).sum()).collect();
    let mut kc = vec![kc0.clone()];
    let mut kp = vec![kp0.clone()];
    for n in 1..=order {
        let c: Vec<f64> = (0..nc)
            .map(|i| (0..np).map(|p| m[(i, p)] * kp[n - 1][p]).sum::<f64>() / kc0[i])
            .collect();
        let p: Vec<f64> = (0..np)
            .map(|j| (0..nc).map(|i| m[(i, j)] * c[i]).sum::<f64>() / kp0[j])
            .collect();
        kc.push(c);
        kp.push(p);
    }
    (kc, kp)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Matrix with rows (and columns) reordered by `perm`.
pub fn permute_rows(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(perm[r], c)])
}

pub fn permute_cols(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, perm[c])])
}

pub fn shuffled(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Balanced panel where `dy = 0.3 dC + fixed effects + noise`; every other
/// regressor is independent noise.
pub fn synthetic_panel(rng: &mut impl Rng, countries: usize, beta: f64, sigma: f64) -> vxf_core::PanelDataset {
    use rand_distr::{Distribution, Normal};
    use vxf_core::panel::{PanelRow, WINDOWS};
    let std = Normal::new(0.0, 1.0).unwrap();
    let noise = Normal::new(0.0, sigma).unwrap();
    let alpha: Vec<f64> = (0..countries).map(|_| std.sample(rng)).collect();
    let theta: Vec<f64> = (0..WINDOWS.len()).map(|_| std.sample(rng)).collect();
    let mut rows = Vec::new();
    for (i, code) in country_codes(countries).into_iter().enumerate() {
        for t in 0..WINDOWS.len() {
            let dc = std.sample(rng);
            rows.push(PanelRow {
                country: code.clone(),
                period: t,
                dy: beta * dc + alpha[i] + theta[t] + noise.sample(rng),
                y_lag: 9.0 + std.sample(rng),
                n: 0.05 * std.sample(rng),
                dk: 0.1 * std.sample(rng),
                dh: 0.02 * std.sample(rng),
                h_lag: 1.0 + 0.2 * std.sample(rng),
                dc,
                c_lag: std.sample(rng),
            });
        }
    }
    vxf_core::PanelDataset {
        metric: vxf_core::Metric::Vxf,
        metric_transform: vxf_core::Transform::Log,
        human_capital_transform: vxf_core::Transform::Log,
        rows,
        rejected: Vec::new(),
    }
}

/// Solves `A X = B` by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let mut aug: Vec<Vec<f64>> = (0..n).map(|i| a[i].iter().chain(&b[i]).copied().collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs())).unwrap();
        aug.swap(col, piv);
        let p = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    for k in 0..n + m {
                        aug[r][k] -= f * aug[col][k];
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub struct Oracle {
    pub beta: Vec<f64>,
    pub resid: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// OLS by normal equations with the HC1 sandwich written out term by term.
pub fn ols_hc1(x: &[Vec<f64>], y: &[f64]) -> Oracle {
    let n = x.len();
    let k = x[0].len();
    let xtx: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| (0..n).map(|i| x[i][a] * x[i][b]).sum()).collect())
        .collect();
    let ident: Vec<Vec<f64>> = (0..k).map(|a| (0..k).map(|b| (a == b) as u8 as f64).collect()).collect();
    let inv = gauss_jordan(&xtx, &ident);
    let xty: Vec<f64> = (0..k).map(|a| (0..n).map(|i| x[i][a] * y[i]).sum()).collect();
    let beta: Vec<f64> = (0..k).map(|a| (0..k).map(|b| inv[a][b] * xty[b]).sum()).collect();
    let resid: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..k).map(|a| x[i][a] * beta[a]).sum::<f64>())
        .collect();
    let meat: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| (0..n).map(|i| x[i][a] * x[i][b] * resid[i] * resid[i]).sum()).collect())
        .collect();
    let scale = n as f64 / (n - k) as f64;
    let cov = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let mut s = 0.0;
                    for p in 0..k {
                        for q in 0..k {
                            s += inv[a][p] * meat[p][q] * inv[q][b];
                        }
                    }
                    s * scale
                })
                .collect()
        })
        .collect();
    Oracle { beta, resid, cov }
}

/// Regressors, then every country dummy, then period dummies after the first.
pub fn full_design(panel: &vxf_core::PanelDataset, spec: vxf_core::ModelSpec) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = vxf_core::regression::TwoWayDesign::from_panel(panel, spec);
    let ne = d.n_entities();
    let rows = (0..d.y.len())
        .map(|i| {
            let mut r: Vec<f64> = d.x.row(i).iter().copied().collect();
            r.extend((0..ne).map(|e| (d.entity[i] == e) as u8 as f64));
            r.extend((1..d.n_periods).map(|t| (d.period[i] == t) as u8 as f64));
            r
        })
        .collect();
    (rows, d.y.iter().copied().collect())
}
