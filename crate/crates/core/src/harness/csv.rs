//! Sweep CSV: fixed header, 6 significant digits, `inf` for a disabled timer,
//! empty cells for missing metrics.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analytic::Timeout;
use crate::error::{Error, Result};
use crate::harness::sweep::{RowStatus, RunMode, SweepRow};

pub const CSV_HEADER: &str = "mode,m,tout_s,seed,rtt_s,p_timeout,gamma_raw,gamma_good,status";

/// `%g`-style formatting with 6 significant digits.
pub fn fmt_sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sig6).unwrap_or_default()
}

fn fmt_tout(t: Timeout<f64>) -> String {
    match t {
        Timeout::Finite(v) => fmt_sig6(v),
        Timeout::Infinite => "inf".into(),
    }
}

pub fn to_csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.mode,
            r.m,
            fmt_tout(r.tout),
            r.seed,
            fmt_opt(r.rtt_s),
            fmt_opt(r.p_timeout),
            fmt_opt(r.gamma_raw),
            fmt_opt(r.gamma_good),
            r.status
        );
    }
    out
}

pub fn emit_csv(rows: &[SweepRow], destination: &Path) -> Result<()> {
    fs::write(destination, to_csv_string(rows)).map_err(|source| Error::Io {
        path: destination.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv_named(&text, &path.display().to_string())
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    parse_csv_named(text, "<csv>")
}

fn parse_csv_named(text: &str, origin: &str) -> Result<Vec<SweepRow>> {
    let err = |line: usize, msg: String| Error::Parse {
        origin: origin.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        Some((_, h)) => return Err(err(1, format!("unexpected header `{h}`"))),
        None => return Err(err(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 9 {
            return Err(err(ln, format!("expected 9 fields, got {}", f.len())));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|e| err(ln, format!("bad number `{s}`: {e}")))
            }
        };
        let tout = if f[2] == "inf" {
            Timeout::Infinite
        } else {
            Timeout::Finite(num(f[2])?.ok_or_else(|| err(ln, "missing tout".into()))?)
        };
        rows.push(SweepRow {
            mode: f[0]
                .parse::<RunMode>()
                .map_err(|e| err(ln, e.to_string()))?,
            m: f[1]
                .parse()
                .map_err(|e| err(ln, format!("bad m `{}`: {e}", f[1])))?,
            tout,
            seed: f[3]
                .parse()
                .map_err(|e| err(ln, format!("bad seed `{}`: {e}", f[3])))?,
            rtt_s: num(f[4])?,
            p_timeout: num(f[5])?,
            gamma_raw: num(f[6])?,
            gamma_good: num(f[7])?,
            status: f[8]
                .parse::<RowStatus>()
                .map_err(|e| err(ln, e.to_string()))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn theory_row() -> SweepRow {
        SweepRow {
            mode: RunMode::Theory,
            m: 32,
            tout: Timeout::Infinite,
            seed: 0,
            rtt_s: Some(0.775816),
            p_timeout: Some(0.0),
            gamma_raw: Some(0.644482),
            gamma_good: Some(0.644482),
            status: RowStatus::Converged,
        }
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(fmt_sig6(0.6625), "0.6625");
        assert_eq!(fmt_sig6(0.77581564), "0.775816");
        assert_eq!(fmt_sig6(2.0), "2");
        assert_eq!(fmt_sig6(123456789.0), "1.23457e8");
        assert_eq!(fmt_sig6(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig6(0.0001234567), "0.000123457");
        assert_eq!(fmt_sig6(999999.7), "1e6");
        assert_eq!(fmt_sig6(-0.5), "-0.5");
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(to_csv_string(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn theory_row_round_trips() {
        let rows = vec![theory_row()];
        assert_eq!(parse_csv(&to_csv_string(&rows)).unwrap(), rows);
    }

    #[test]
    fn saturated_row_has_empty_metrics() {
        let r = SweepRow {
            rtt_s: None,
            p_timeout: None,
            gamma_raw: None,
            gamma_good: None,
            status: RowStatus::Saturated,
            tout: Timeout::Finite(2.0),
            ..theory_row()
        };
        let s = to_csv_string(&[r.clone()]);
        assert!(s.ends_with("theory,32,2,0,,,,,saturated\n"));
        assert_eq!(parse_csv(&s).unwrap(), vec![r]);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(parse_csv("mode,m\n").is_err());
        assert!(parse_csv("").is_err());
    }

    #[test]
    fn io_error_names_the_path() {
        let p = Path::new("/nonexistent-dir/out.csv");
        let e = emit_csv(&[], p).unwrap_err();
        assert!(e.to_string().contains("/nonexistent-dir/out.csv"));
    }

    proptest! {
        // formatting is idempotent after one pass through the parser
        #[test]
        fn write_parse_write_is_stable(
            m in 0u32..500,
            seed in 0u64..10,
            rtt in 0.0f64..100.0,
            p in 0.0f64..1.0,
            g in 0.0f64..1.2,
            inf in any::<bool>(),
            tout in 0.7f64..10.0,
        ) {
            let row = SweepRow {
                mode: if seed == 0 { RunMode::Theory } else { RunMode::Sim },
                m,
                tout: if inf { Timeout::Infinite } else { Timeout::Finite(tout) },
                seed,
                rtt_s: Some(rtt),
                p_timeout: Some(p),
                gamma_raw: Some(g),
                gamma_good: Some(g * (1.0 - p)),
                status: RowStatus::Converged,
            };
            let once = to_csv_string(&[row.clone()]);
            let parsed = parse_csv(&once).unwrap();
            prop_assert_eq!(to_csv_string(&parsed), once);
            let back = &parsed[0];
            prop_assert!((back.rtt_s.unwrap() - rtt).abs() <= 1e-5 * rtt.abs().max(1e-300) + 1e-300);
        }
    }
}
