//! Text renderings of command outputs. Floats in CSV and tables use 17
//! significant digits so every value reads back exactly.

use std::fmt::Write as _;

use serde::Serialize;

use crate::commands::{
    model_type, BoundOutput, ScanRow, SpectrumOutput, ValidateOutput, VerifyOutput, SCAN_COLUMNS,
};

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs always serialize");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv of utf-8 fields")
}

fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let text: Vec<String> = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(text.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, &mut header.iter().copied());
    for row in rows {
        line(&mut out, &mut row.iter().map(String::as_str));
    }
    out
}

/// Scalar leaves of a JSON value as `path = value` lines; arrays are skipped.
fn flatten(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        serde_json::Value::Number(n) => {
            let text = match (n.as_u64(), n.as_i64(), n.as_f64()) {
                (Some(u), _, _) => u.to_string(),
                (_, Some(i), _) => i.to_string(),
                (_, _, Some(f)) => float(f),
                _ => n.to_string(),
            };
            out.push((prefix.into(), text));
        }
        serde_json::Value::Bool(b) => out.push((prefix.into(), b.to_string())),
        serde_json::Value::String(s) => out.push((prefix.into(), s.clone())),
        serde_json::Value::Null | serde_json::Value::Array(_) => {}
    }
}

pub fn validate_table(v: &ValidateOutput) -> String {
    let m = &v.mapping;
    let mut s = String::new();
    writeln!(s, "model        {}", model_type(&v.model)).unwrap();
    writeln!(s, "states       {}", v.states).unwrap();
    writeln!(s, "moves        {}", v.moves).unwrap();
    writeln!(s, "chain        ok").unwrap();
    writeln!(
        s,
        "commutative  {} ({} violating triples)",
        m.commutative, m.violations
    )
    .unwrap();
    writeln!(s, "on support   {}", m.support_commutative).unwrap();
    writeln!(s, "involutive   {}", m.involutive).unwrap();
    s
}

pub fn validate_csv(v: &ValidateOutput) -> String {
    let m = &v.mapping;
    csv_table(
        &[
            "model",
            "states",
            "moves",
            "commutative",
            "support_commutative",
            "involutive",
        ],
        [vec![
            model_type(&v.model),
            v.states.to_string(),
            v.moves.to_string(),
            m.commutative.to_string(),
            m.support_commutative.to_string(),
            m.involutive.to_string(),
        ]],
    )
}

const INTERMEDIATE_COLUMNS: [&str; 11] = [
    "lambda",
    "lambda1",
    "lambda2",
    "n",
    "alpha",
    "beta",
    "epsilon",
    "alpha1",
    "alpha2",
    "epsilon_prime",
    "c_star",
];

pub fn bound_csv(b: &BoundOutput) -> String {
    let mut header = vec!["criterion", "valid", "best", "bound"];
    header.extend(INTERMEDIATE_COLUMNS);
    header.push("reason");
    let rows = b.certificates.iter().enumerate().map(|(i, c)| {
        let entries = c.intermediates.entries();
        let mut row = vec![
            c.criterion.name().to_string(),
            c.valid.to_string(),
            (b.best == Some(i)).to_string(),
            opt(c.bound),
        ];
        for col in INTERMEDIATE_COLUMNS {
            row.push(opt(entries.iter().find(|(k, _)| *k == col).map(|e| e.1)));
        }
        row.push(c.reason.clone().unwrap_or_default());
        row
    });
    csv_table(&header, rows)
}

pub fn bound_table(b: &BoundOutput) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "model {} ({} states, {} moves)",
        model_type(&b.model),
        b.states,
        b.moves
    )
    .unwrap();
    writeln!(s).unwrap();
    let rows: Vec<Vec<String>> = b
        .certificates
        .iter()
        .map(|c| {
            vec![
                c.criterion.name().into(),
                if c.valid { "yes" } else { "no" }.into(),
                c.bound.map(float).unwrap_or_else(|| "-".into()),
                c.reason.clone().unwrap_or_default(),
            ]
        })
        .collect();
    s.push_str(&aligned(&["criterion", "valid", "bound", "reason"], &rows));
    for c in &b.certificates {
        writeln!(s).unwrap();
        writeln!(s, "{}:", c.criterion.name()).unwrap();
        for (k, v) in c.intermediates.entries() {
            writeln!(s, "  {k:<14} {}", float(v)).unwrap();
        }
    }
    for skip in &b.skipped {
        writeln!(s, "\n{} not applicable: {}", skip.criterion, skip.reason).unwrap();
    }
    let mut details = Vec::new();
    flatten("", &b.details, &mut details);
    if !details.is_empty() {
        writeln!(s, "\nmodel constants:").unwrap();
        for (k, v) in details {
            writeln!(s, "  {k:<28} {v}").unwrap();
        }
    }
    match b.best_certificate() {
        Some(c) => writeln!(
            s,
            "\nbest bound {} ({})",
            float(c.bound.unwrap_or(f64::NAN)),
            c.criterion.name()
        ),
        None => writeln!(s, "\nno valid certificate"),
    }
    .unwrap();
    s
}

fn scan_cells(r: &ScanRow) -> Vec<String> {
    vec![
        r.kind.clone(),
        r.family.clone(),
        float(r.beta),
        opt(r.epsilon),
        opt(r.epsilon_stated),
        opt(r.lambda),
        opt(r.bound),
    ]
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    csv_table(&SCAN_COLUMNS, rows.iter().map(scan_cells))
}

pub fn scan_table(rows: &[ScanRow]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(scan_cells).collect();
    aligned(&SCAN_COLUMNS, &cells)
}

const CHECK_COLUMNS: [&str; 5] = ["check", "value", "required", "slack", "passed"];

fn check_cells(v: &VerifyOutput) -> Vec<Vec<String>> {
    v.report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                float(c.value),
                float(c.required),
                float(c.slack),
                c.passed.to_string(),
            ]
        })
        .collect()
}

pub fn verify_csv(v: &VerifyOutput) -> String {
    csv_table(&CHECK_COLUMNS, check_cells(v))
}

pub fn verify_table(v: &VerifyOutput) -> String {
    let r = &v.report;
    let mut s = String::new();
    writeln!(s, "model {}", model_type(&v.model)).unwrap();
    match &v.certificate {
        Some(c) => writeln!(
            s,
            "certificate {} kappa {}",
            c.criterion.name(),
            float(r.kappa)
        ),
        None => writeln!(s, "no valid certificate, checking kappa {}", float(r.kappa)),
    }
    .unwrap();
    writeln!(s, "seed {} samples {}", r.seed, r.samples).unwrap();
    writeln!(
        s,
        "bochner sample min {} refined min {} skipped {}",
        float(r.bochner.sample_min_ratio),
        float(r.bochner.min_ratio),
        r.bochner.skipped
    )
    .unwrap();
    writeln!(s).unwrap();
    s.push_str(&aligned(&CHECK_COLUMNS, &check_cells(v)));
    writeln!(
        s,
        "\n{}",
        if r.passed {
            "all checks passed"
        } else {
            "VERIFICATION FAILED"
        }
    )
    .unwrap();
    s
}

pub fn spectrum_csv(sp: &SpectrumOutput) -> String {
    csv_table(
        &["index", "eigenvalue"],
        sp.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, e)| vec![i.to_string(), float(*e)]),
    )
}

pub fn spectrum_table(sp: &SpectrumOutput) -> String {
    let mut s = String::new();
    writeln!(s, "states {}", sp.states).unwrap();
    writeln!(s, "gap    {}", float(sp.gap)).unwrap();
    if !sp.eigenvalues.is_empty() {
        writeln!(s).unwrap();
        let rows: Vec<Vec<String>> = sp
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, e)| vec![i.to_string(), float(*e)])
            .collect();
        s.push_str(&aligned(&["index", "eigenvalue"], &rows));
    }
    s
}
