use serde::{Deserialize, Serialize};

use super::Deg4Pseudomoments;

/// Largest violation in one condition class and where it occurred. Index
/// tuples are 0-based.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub max: f64,
    pub worst: Vec<usize>,
}

impl Violation {
    fn record(&mut self, v: f64, at: &[usize]) {
        if v > self.max || (self.worst.is_empty() && v >= self.max) {
            self.max = v;
            self.worst = at.to_vec();
        }
    }
}

/// `c2`: unit normalization; `c3`: odd-parity entries vanish; `c4`:
/// `Z[{i,j},{i,k}] = Z[{j,k},∅] = Z[{j},{k}]`; `c5`: entries on four distinct
/// indices agree across the three pairings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub c2: Violation,
    pub c3: Violation,
    pub c4: Violation,
    pub c5: Violation,
    pub tol: f64,
    pub pass: bool,
}

impl ConstraintReport {
    pub fn max_violation(&self) -> f64 {
        self.c2.max.max(self.c3.max).max(self.c4.max).max(self.c5.max)
    }
}

/// Checks every linear condition of a reduced degree-4 matrix over all index
/// tuples that exist for this `N`.
pub fn verify_constraints(z: &Deg4Pseudomoments, tol: f64) -> ConstraintReport {
    let n = z.n;
    let pr = &z.pairs;
    let mut rep = ConstraintReport {
        tol,
        ..Default::default()
    };

    rep.c2.record((z.z00 - 1.0).abs(), &[]);
    for i in 0..n {
        rep.c2.record((z.z11.get(i, i) - 1.0).abs(), &[i]);
    }
    for (p, (i, j)) in pr.iter().enumerate() {
        rep.c2.record((z.z22.get(p, p) - 1.0).abs(), &[i, j]);
    }

    for i in 0..n {
        rep.c3.record(z.z01[i].abs(), &[i]);
        for (p, (j, k)) in pr.iter().enumerate() {
            rep.c3.record(z.z12[(i, p)].abs(), &[i, j, k]);
        }
    }

    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in (j + 1)..n {
                if k == i {
                    continue;
                }
                let a = z.z22.get(pr.position(i, j), pr.position(i, k));
                let b = z.z02[pr.position(j, k)];
                let c = z.z11.get(j, k);
                let v = (a - b).abs().max((b - c).abs()).max((a - c).abs());
                rep.c4.record(v, &[i, j, k]);
            }
        }
    }

    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in (k + 1)..n {
                    let a = z.z22.get(pr.position(i, j), pr.position(k, l));
                    let b = z.z22.get(pr.position(i, k), pr.position(j, l));
                    let c = z.z22.get(pr.position(i, l), pr.position(j, k));
                    let v = (a - b).abs().max((a - c).abs()).max((b - c).abs());
                    rep.c5.record(v, &[i, j, k, l]);
                }
            }
        }
    }

    rep.pass = rep.max_violation() <= tol;
    rep
}
