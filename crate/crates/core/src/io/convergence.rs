//! Observed convergence orders under mesh refinement.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One refinement level: mesh size and errors in the order of `ConvergenceTable::variables`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRun {
    pub nx: usize,
    pub h: f64,
    pub errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub variables: Vec<String>,
    pub runs: Vec<ConvergenceRun>,
    /// `orders[i][v]` compares run `i` with run `i − 1`; `None` for the first run.
    pub orders: Vec<Vec<Option<f64>>>,
}

/// `log(e₁/e₂) / log(h₁/h₂)` between consecutive runs. `h` must strictly decrease.
pub fn convergence_table(variables: Vec<String>, runs: Vec<ConvergenceRun>) -> Result<ConvergenceTable> {
    if runs.is_empty() {
        return Err(Error::Invalid("no runs".into()));
    }
    if let Some(r) = runs.iter().find(|r| r.errors.len() != variables.len()) {
        return Err(Error::Dimension(format!("run with h = {} has {} errors for {} variables", r.h, r.errors.len(), variables.len())));
    }
    if runs.windows(2).any(|w| !(w[1].h < w[0].h)) {
        return Err(Error::Invalid("mesh sizes must strictly decrease".into()));
    }
    let mut orders = vec![vec![None; variables.len()]];
    for w in runs.windows(2) {
        let ratio = (w[0].h / w[1].h).ln();
        orders.push(w[0].errors.iter().zip(&w[1].errors).map(|(a, b)| Some((a / b).ln() / ratio)).collect());
    }
    Ok(ConvergenceTable { variables, runs, orders })
}

impl ConvergenceTable {
    /// Order between the two finest runs for variable `v`.
    pub fn finest_order(&self, v: usize) -> Option<f64> {
        self.orders.last().and_then(|o| o[v])
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("nx,h");
        for v in &self.variables {
            write!(s, ",L2_{v},O_{v}").unwrap();
        }
        s.push('\n');
        for (run, ord) in self.runs.iter().zip(&self.orders) {
            write!(s, "{},{:.16e}", run.nx, run.h).unwrap();
            for (e, o) in run.errors.iter().zip(ord) {
                match o {
                    Some(o) => write!(s, ",{e:.16e},{o:.16e}").unwrap(),
                    None => write!(s, ",{e:.16e},").unwrap(),
                }
            }
            s.push('\n');
        }
        s
    }
}

impl std::fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:>5}", "Nx")?;
        for v in &self.variables {
            write!(f, " {:>12} {:>6}", format!("L2({v})"), format!("O({v})"))?;
        }
        writeln!(f)?;
        for (run, ord) in self.runs.iter().zip(&self.orders) {
            write!(f, "{:>5}", run.nx)?;
            for (e, o) in run.errors.iter().zip(ord) {
                let o = o.map_or(String::new(), |o| format!("{o:.1}"));
                write!(f, " {e:>12.4E} {o:>6}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(nx: usize, h: f64, e: f64) -> ConvergenceRun {
        ConvergenceRun { nx, h, errors: vec![e] }
    }

    #[test]
    fn second_order_pair() {
        let t = convergence_table(vec!["u".into()], vec![run(10, 0.1, 1e-2), run(20, 0.05, 2.5e-3)]).unwrap();
        assert!((t.finest_order(0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_run_has_blank_order() {
        let t = convergence_table(vec!["u".into()], vec![run(10, 0.1, 1e-2)]).unwrap();
        assert_eq!(t.finest_order(0), None);
        assert!(t.to_csv().lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn non_monotone_h_is_rejected() {
        assert!(convergence_table(vec!["u".into()], vec![run(10, 0.1, 1.0), run(5, 0.2, 1.0)]).is_err());
        assert!(convergence_table(vec!["u".into()], vec![run(10, 0.1, 1.0), run(10, 0.1, 1.0)]).is_err());
    }

    #[test]
    fn display_matches_table_layout() {
        let t = convergence_table(vec!["B1".into()], vec![run(20, 0.1, 3.7615e-2), run(40, 0.05, 1.9009e-2)]).unwrap();
        let s = t.to_string();
        assert!(s.contains("3.7615E-2") && s.contains("1.0"), "{s}");
    }
}
