//! Machine-readable artifacts: JSON reports, CSV tables and the scree plot.
//!
//! Every floating-point value written out is rounded to six significant
//! digits so reruns produce byte-identical files.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::classify::EvalReport;
use crate::efa::{FactorModel, LoadingMatrix, ScoreMatrix, Scree};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::suitability::SuitabilityReport;

pub const SIG_DIGITS: usize = 6;

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// `%g`-style text with six significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
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

/// Rounds every float in a JSON tree to six significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(f) = n.as_f64() {
                let r = round_sig(f, SIG_DIGITS);
                if let Some(num) = serde_json::Number::from_f64(r) {
                    *n = num;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Numerical(e.to_string()))?;
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn loadings_json(l: &LoadingMatrix) -> Value {
    Value::Array(
        l.variables()
            .iter()
            .enumerate()
            .map(|(i, name)| json!({ "variable": name, "loadings": l.matrix().row(i) }))
            .collect(),
    )
}

fn variance_rows(totals: &[f64], p: usize) -> Value {
    let mut cum = 0.0;
    Value::Array(
        totals
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let pct = 100.0 * t / p as f64;
                cum += pct;
                json!({ "component": i + 1, "total": t, "pct_variance": pct, "cumulative_pct": cum })
            })
            .collect(),
    )
}

/// The `efa.json` document.
pub fn efa_report(model: &FactorModel, suitability: Option<&SuitabilityReport>) -> Value {
    let p = model.variables.len();
    let assignment: Vec<Value> = model
        .assignment
        .variables
        .iter()
        .zip(&model.assignment.factor)
        .zip(&model.assignment.cross_loading)
        .map(|((name, f), cross)| {
            json!({ "variable": name, "factor": f.map(|f| f + 1), "cross_loading": cross })
        })
        .collect();
    let communalities: Vec<Value> = model
        .variables
        .iter()
        .zip(&model.communalities)
        .map(|(name, h)| json!({ "variable": name, "initial": 1.0, "extraction": h }))
        .collect();
    json!({
        "variables": model.variables,
        "n_observations": model.n_observations,
        "k": model.k,
        "retention": {
            "rule": model.config.retention.to_string(),
            "kaiser": model.retention_counts.kaiser,
            "cumvar_60": model.retention_counts.cumvar_60,
            "scree_elbow": model.retention_counts.scree_elbow,
        },
        "variance": {
            "initial": variance_rows(&model.eigenvalues, p),
            "extraction": variance_rows(&model.eigenvalues[..model.k], p),
            "rotation": variance_rows(&model.rotation_ssl, p),
        },
        "communalities": communalities,
        "loadings_unrotated": loadings_json(&model.loadings_unrotated),
        "loadings_rotated": loadings_json(&model.loadings_rotated),
        "rotation_matrix": model.rotation.to_rows(),
        "assignment": assignment,
        "groups": model.assignment.groups(model.k),
        "cutoff": model.assignment.cutoff,
        "kaiser_normalize": model.config.kaiser_normalize,
        "score_method": model.config.score_method,
        "suitability": suitability,
    })
}

pub fn scree_csv(scree: &Scree) -> String {
    let mut out = String::from("component,eigenvalue\n");
    for p in &scree.points {
        let _ = writeln!(out, "{},{}", p.component, fmt_sig(p.eigenvalue));
    }
    out
}

/// Self-contained SVG line plot of the scree series.
pub fn scree_svg(scree: &Scree) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const M: f64 = 48.0;
    let n = scree.points.len().max(2);
    let top = scree
        .points
        .iter()
        .map(|p| p.eigenvalue)
        .fold(1.0f64, f64::max)
        .ceil();
    let x = |c: usize| M + (c as f64 - 1.0) * (W - 2.0 * M) / (n as f64 - 1.0);
    let y = |v: f64| H - M - v.max(0.0) / top * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">Scree Plot</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{M}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{M}" y1="{M}" x2="{M}" y2="{0}" stroke="black"/>"#,
        H - M,
        W - M
    );
    for tick in 0..=(top as usize) {
        let ty = y(tick as f64);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{tick}</text>"#,
            M - 6.0,
            ty + 4.0
        );
    }
    // Kaiser reference line at eigenvalue 1
    let _ = writeln!(
        s,
        r##"<line x1="{M}" y1="{0:.1}" x2="{1}" y2="{0:.1}" stroke="#999" stroke-dasharray="4 3"/>"##,
        y(1.0),
        W - M
    );
    let path: Vec<String> = scree
        .points
        .iter()
        .map(|p| format!("{:.1},{:.1}", x(p.component), y(p.eigenvalue)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="2" points="{}"/>"##,
        path.join(" ")
    );
    for p in &scree.points {
        let fill = if Some(p.component) == scree.elbow {
            "#c0392b"
        } else {
            "#1f5fa8"
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{fill}"/>"#,
            x(p.component),
            y(p.eigenvalue)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x(p.component),
            H - M + 16.0,
            p.component
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Component Number</text>"#,
        W / 2.0,
        H - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">Eigenvalue</text>"#,
        H / 2.0,
        H / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Comparison table: `question,variant,precision,recall,f_measure`.
pub fn comparison_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("question,variant,precision,recall,f_measure\n");
    for (q, v, p, r, f) in crate::classify::comparison_rows(reports) {
        let _ = writeln!(out, "{q},{v},{},{},{}", fmt_sig(p), fmt_sig(r), fmt_sig(f));
    }
    out
}

/// Per-report rows with confusion tallies, used for `--format csv`.
pub fn eval_csv(reports: &[EvalReport]) -> String {
    let mut out =
        String::from("question,variant,precision,recall,f_measure,folds,seed,tp,fp,fn,tn\n");
    for r in reports {
        let c = r.confusion;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.question,
            r.variant,
            fmt_sig(r.precision),
            fmt_sig(r.recall),
            fmt_sig(r.f_measure),
            r.folds,
            r.seed,
            c.tp,
            c.fp,
            c.fn_,
            c.tn
        );
    }
    out
}

pub fn scores_csv(user_ids: &[String], scores: &ScoreMatrix) -> String {
    let mut out = String::from("user_id");
    for name in &scores.factor_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, user) in user_ids.iter().enumerate() {
        out.push_str(user);
        for v in scores.values.row(i) {
            out.push(',');
            out.push_str(&fmt_sig(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses a scores CSV back into user ids and a score matrix.
pub fn read_scores_csv(text: &str, source_name: &str) -> Result<(Vec<String>, ScoreMatrix)> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| input(source_name, 1, e.to_string()))?
        .clone();
    if header.get(0) != Some("user_id") || header.len() < 2 {
        return Err(input(
            source_name,
            1,
            "expected header 'user_id,factor1,...'".into(),
        ));
    }
    let factor_names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut users = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            input(
                source_name,
                e.position().map_or(0, |p| p.line()),
                e.to_string(),
            )
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        users.push(rec[0].to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| input(source_name, line, format!("invalid score '{v}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let values = if rows.is_empty() {
        Matrix::zeros(0, factor_names.len())
    } else {
        Matrix::from_rows(&rows)?
    };
    Ok((
        users,
        ScoreMatrix {
            factor_names,
            values,
        },
    ))
}

fn input(source_name: &str, line: u64, message: String) -> Error {
    Error::Input {
        source_name: source_name.to_string(),
        line,
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efa::scree_series;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig(0.714285714), "0.714286");
        assert_eq!(fmt_sig(664.2291), "664.229");
        assert_eq!(fmt_sig(3.0), "3");
        assert_eq!(fmt_sig(-0.000123456789), "-0.000123457");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig(12345678.0), "1.23457e7");
        assert_eq!(round_sig(0.123456789, 6), 0.123457);
    }

    #[test]
    fn json_rounding_keeps_integers() {
        let mut v = json!({"a": 1, "b": [0.1234567891, 2.0], "c": {"d": 1e-300}});
        round_json(&mut v);
        assert_eq!(v["a"], 1);
        assert_eq!(v["b"][0], 0.123457);
        assert_eq!(v["c"]["d"], 1e-300);
    }

    #[test]
    fn scree_outputs() {
        let s = scree_series(&[2.5, 1.2, 0.2, 0.1]);
        let csv = scree_csv(&s);
        assert_eq!(csv, "component,eigenvalue\n1,2.5\n2,1.2\n3,0.2\n4,0.1\n");
        let svg = scree_svg(&s);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 4);
    }

    #[test]
    fn scores_round_trip() {
        let scores = ScoreMatrix {
            factor_names: vec!["factor1".into(), "factor2".into()],
            values: Matrix::from_rows(&[vec![0.5, -1.25], vec![-0.5, 1.25]]).unwrap(),
        };
        let users = vec!["a".to_string(), "b".to_string()];
        let text = scores_csv(&users, &scores);
        let (u, back) = read_scores_csv(&text, "scores.csv").unwrap();
        assert_eq!(u, users);
        assert_eq!(back, scores);
    }
}
