//! CSV rendering of sweep and gap-study tables.
//!
//! Floats are written with 17 significant digits so values round-trip
//! exactly. Failed rows keep their key column and carry `NaN` elsewhere.

use std::fmt::Write as _;

use crate::montecarlo::SweepRow;
use crate::optimizer::GapRow;

pub const SWEEP_HEADER: &str = "lambda_b,mc_mean,mc_stderr,ci_low,ci_high,analytic_exact,\
analytic_asymptotic,alltransmit_mc,alltransmit_stderr,discards";

pub const GAP_HEADER: &str = "K,closed_form,numeric_exact,numeric_asymptotic,abs_gap,rel_error";

/// 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{}", fmt_f64(row.lambda_b));
        match &row.outcome {
            Ok(s) => {
                let fields = [
                    s.silent.mean,
                    s.silent.std_error,
                    s.silent.ci_low,
                    s.silent.ci_high,
                    s.analytic_exact,
                    s.analytic_asymptotic,
                    s.all_transmit.mean,
                    s.all_transmit.std_error,
                ];
                for f in fields {
                    let _ = write!(out, ",{}", fmt_f64(f));
                }
                let _ = writeln!(out, ",{}", s.silent.discards);
            }
            Err(_) => out.push_str(",NaN,NaN,NaN,NaN,NaN,NaN,NaN,NaN,NaN\n"),
        }
    }
    out
}

pub fn gap_csv(rows: &[GapRow]) -> String {
    let mut out = String::new();
    out.push_str(GAP_HEADER);
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{}", fmt_f64(row.k));
        match &row.outcome {
            Ok(g) => {
                for f in [
                    g.closed_form,
                    g.numeric_exact,
                    g.numeric_asymptotic,
                    g.abs_gap,
                    g.rel_error,
                ] {
                    let _ = write!(out, ",{}", fmt_f64(f));
                }
                out.push('\n');
            }
            Err(_) => out.push_str(",NaN,NaN,NaN,NaN,NaN\n"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.987_072_591_083_584, 1e-300, 123456.789] {
            let s = fmt_f64(v);
            let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn failed_rows_keep_column_count() {
        let rows = vec![GapRow {
            k: 3.0,
            outcome: Err(Error::ZeroDenominator("x")),
        }];
        let csv = gap_csv(&rows);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line.split(',').count(), GAP_HEADER.split(',').count());
        assert_eq!(SWEEP_HEADER.split(',').count(), 10);
    }
}
