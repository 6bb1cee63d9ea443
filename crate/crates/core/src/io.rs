//! Text and JSON formats.
//!
//! Complex matrices are nested arrays `[[[re, im], ...], ...]`, row major.
//! Irreps are referred to by label.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::clebsch_gordan::{verify, CgDecomposition};
use crate::context::GroupContext;
use crate::error::{Error, Result};
use crate::fourier::FourierCoefficients;
use crate::group::{GroupKind, GroupSignal};
use crate::inversion::{Indeterminacy, InversionResult};
use crate::linalg::{CMatrix, C64};
use crate::spectra::{BispectrumCoefficients, BispectrumEntry, SelectionPlan, SpectrumMode};

fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}

/// `# group=<kind>` followed by one value per line in element order.
pub fn signal_to_string(signal: &GroupSignal) -> String {
    let mut out = format!("# group={}\n", signal.kind());
    for v in signal.values() {
        writeln!(out, "{v:?}").expect("writing to a String");
    }
    out
}

pub fn parse_signal(text: &str) -> Result<GroupSignal> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty signal file".into()))?;
    let Some(kind) = header.strip_prefix('#').map(str::trim).and_then(|h| h.strip_prefix("group=")) else {
        return parse_err(format!("expected `# group=<kind>` header, found `{header}`"));
    };
    let kind: GroupKind = kind.trim().parse()?;
    let mut values = Vec::new();
    for (i, l) in lines.enumerate() {
        let v: f64 = l.parse().map_err(|_| Error::Parse(format!("line {}: `{l}` is not a number", i + 2)))?;
        values.push(v);
    }
    let order = kind.order();
    if values.len() != order {
        return parse_err(format!("{kind} needs {order} values, file has {}", values.len()));
    }
    GroupSignal::new(kind, values)
}

pub fn read_signal(path: impl AsRef<Path>) -> Result<GroupSignal> {
    parse_signal(&fs::read_to_string(path)?)
}

pub fn write_signal(path: impl AsRef<Path>, signal: &GroupSignal) -> Result<()> {
    fs::write(path, signal_to_string(signal))?;
    Ok(())
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())).collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<CMatrix> {
    let rows = v.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let nr = rows.len();
    let mut data = Vec::new();
    let mut nc = None;
    for row in rows {
        let row = row.as_array().ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
        if *nc.get_or_insert(row.len()) != row.len() {
            return parse_err("matrix rows have different lengths");
        }
        for e in row {
            let pair = e.as_array().filter(|p| p.len() == 2);
            let parts = pair.and_then(|p| Some((p[0].as_f64()?, p[1].as_f64()?)));
            let Some((re, im)) = parts else {
                return parse_err(format!("matrix entry must be [re, im], found {e}"));
            };
            data.push(C64::new(re, im));
        }
    }
    let nc = nc.unwrap_or(0);
    if nr == 0 || nc == 0 {
        return parse_err("empty matrix");
    }
    Ok(DMatrix::from_row_slice(nr, nc, &data))
}

fn str_field<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.get(key).and_then(Value::as_str).ok_or_else(|| Error::Parse(format!("missing string field `{key}`")))
}

fn group_of(v: &Value) -> Result<Arc<GroupContext>> {
    let kind: GroupKind = str_field(v, "group")?.parse()?;
    GroupContext::get(&kind)
}

pub fn fourier_to_json(ctx: &GroupContext, f: &FourierCoefficients) -> Value {
    let mut coeffs = Map::new();
    for (k, m) in f.coeffs().iter().enumerate() {
        coeffs.insert(ctx.label(k).to_string(), matrix_to_json(m));
    }
    json!({ "group": ctx.kind().to_string(), "coeffs": coeffs })
}

pub fn fourier_from_json(v: &Value) -> Result<(Arc<GroupContext>, FourierCoefficients)> {
    let ctx = group_of(v)?;
    let map = v.get("coeffs").and_then(Value::as_object).ok_or_else(|| Error::Parse("missing object `coeffs`".into()))?;
    let mut slots: Vec<Option<CMatrix>> = vec![None; ctx.num_irreps()];
    for (label, m) in map {
        let k = ctx.irreps().index_of(label)?;
        slots[k] = Some(matrix_from_json(m)?);
    }
    let mut coeffs = Vec::with_capacity(slots.len());
    for (k, s) in slots.into_iter().enumerate() {
        coeffs.push(s.ok_or_else(|| Error::IncompleteInput(format!("missing Fourier coefficient {}", ctx.label(k))))?);
    }
    let f = FourierCoefficients::new(&ctx, coeffs)?;
    Ok((ctx, f))
}

pub fn bispectrum_to_json(ctx: &GroupContext, b: &BispectrumCoefficients) -> Value {
    let pairs: Vec<Value> = b
        .entries()
        .iter()
        .map(|e| {
            json!({
                "rho1": ctx.label(e.pair.0),
                "rho2": ctx.label(e.pair.1),
                "matrix": matrix_to_json(&e.matrix),
            })
        })
        .collect();
    json!({
        "group": ctx.kind().to_string(),
        "mode": b.mode(),
        "pairs": pairs,
        "scalar_count": b.scalar_count(),
    })
}

pub fn bispectrum_from_json(v: &Value) -> Result<(Arc<GroupContext>, BispectrumCoefficients)> {
    let ctx = group_of(v)?;
    let mode: SpectrumMode = serde_json::from_value(v.get("mode").cloned().unwrap_or(Value::Null))
        .map_err(|e| Error::Parse(format!("bad `mode`: {e}")))?;
    let pairs = v.get("pairs").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing array `pairs`".into()))?;
    let mut entries = Vec::with_capacity(pairs.len());
    for p in pairs {
        let a = ctx.irreps().index_of(str_field(p, "rho1")?)?;
        let b = ctx.irreps().index_of(str_field(p, "rho2")?)?;
        let m = p.get("matrix").ok_or_else(|| Error::Parse("pair without `matrix`".into()))?;
        entries.push(BispectrumEntry { pair: (a, b), matrix: matrix_from_json(m)? });
    }
    let b = BispectrumCoefficients::new(&ctx, mode, entries)?;
    if let Some(n) = v.get("scalar_count") {
        if n.as_u64() != Some(b.scalar_count() as u64) {
            return parse_err(format!("scalar_count {n} does not match the {} scalars present", b.scalar_count()));
        }
    }
    Ok((ctx, b))
}

pub fn triple_correlation_to_json(kind: &GroupKind, t: &DMatrix<f64>) -> Value {
    let rows: Vec<Vec<f64>> = (0..t.nrows()).map(|i| t.row(i).iter().copied().collect()).collect();
    json!({
        "group": kind.to_string(),
        "mode": "tc",
        "matrix": rows,
        "scalar_count": t.len(),
    })
}

pub fn cg_to_json(ctx: &GroupContext, cg: &CgDecomposition) -> Value {
    let (unitarity, block) = verify(ctx, cg);
    json!({
        "group": ctx.kind().to_string(),
        "rho1": ctx.label(cg.pair.0),
        "rho2": ctx.label(cg.pair.1),
        "blocks": cg.blocks.iter().map(|&k| ctx.label(k)).collect::<Vec<_>>(),
        "matrix": matrix_to_json(&cg.matrix),
        "unitarity_residual": unitarity,
        "block_residual": block,
    })
}

pub fn plan_to_json(ctx: &GroupContext, plan: &SelectionPlan) -> Value {
    let pairs: Vec<Value> = plan.labeled_pairs(ctx).into_iter().map(|(a, b)| json!({ "rho1": a, "rho2": b })).collect();
    json!({
        "group": ctx.kind().to_string(),
        "seed": plan.seed.map(|s| ctx.label(s).to_string()),
        "pairs": pairs,
        "scalar_count": plan.scalar_count(ctx),
    })
}

fn indeterminacy_note(ctx: &GroupContext, r: &InversionResult) -> String {
    match (r.indeterminacy, ctx.kind().is_abelian()) {
        (Indeterminacy::ResolvedToReal, true) => "phase fixed to a group translation; signal is real".into(),
        (Indeterminacy::ResolvedToReal, false) => "unitary factor resolved; signal is real".into(),
        (Indeterminacy::UnresolvedUnitary, _) => {
            "no unitary factor gives a real signal; Fourier coefficients are correct up to that factor".into()
        }
    }
}

pub fn inversion_report(ctx: &GroupContext, r: &InversionResult) -> Value {
    json!({
        "group": ctx.kind().to_string(),
        "indeterminacy": r.indeterminacy,
        "indeterminacy_note": indeterminacy_note(ctx, r),
        "residual_imag": r.residual_imag,
        "consistency_residual": r.consistency_residual,
        "steps": r.steps,
        "fourier": fourier_to_json(ctx, &r.fourier),
    })
}

pub fn read_json(path: impl AsRef<Path>) -> Result<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_json(path: impl AsRef<Path>, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}
