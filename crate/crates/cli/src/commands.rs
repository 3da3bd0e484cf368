use std::path::Path;

use num_complex::Complex64;
use pimodel::herglotz::{
    abstract_kernel, frame_symbol, gamma_kernel, herglotz_kernel, kernel_gram,
    multiplier_identity_gap, psd_margin, ModelFrame,
};
use pimodel::livsic::{coincide, sample_points, CharFn, Coincidence, MatrixFunction};
use pimodel::model_space::{
    atomic_singular_inner, carrier_measure, clark_measure, compressed_shift, crofoot,
    inner_from_measure, isometry_gap, mult_partial_isometry, quadrature_isometry_check,
    shift_matrix, tm_basis, AtomicMeasure, AtomicMeasureJson, FiniteBlaschke, FiniteBlaschkeJson,
    Rational,
};
use pimodel::numerics::{pair, singular_values, CMatrixJson, ONE, ZERO};
use pimodel::orders::{hm_order, leq, leq_q, sim_check, simq_check};
use pimodel::{CMatrix, Error, PartialIsometry, Tolerance};
use serde_json::{json, Value};

use crate::input::{self, Failure, Outcome};
use crate::{Report, RouteArg, Settings};

const DEFAULT_SAMPLES: usize = 25;
const KERNEL_SAMPLES: usize = 6;
/// Cut-off refinement target for the singular inner quadrature.
const QUADRATURE_TOL: f64 = 1e-6;
/// Rotation applied to reflected points so that no outside point is the
/// reflection of an inside one (the kernel denominator would vanish).
const REFLECTION_TWIST: f64 = 0.3;

fn cz(z: Complex64) -> Value {
    json!(pair(z))
}

fn mat(m: &CMatrix) -> Value {
    serde_json::to_value(CMatrixJson::from(m)).unwrap_or(Value::Null)
}

fn rational(r: &Rational) -> Value {
    json!({
        "numer": r.numer().iter().map(|&z| pair(z)).collect::<Vec<_>>(),
        "poles": r.poles().iter().map(|&z| pair(z)).collect::<Vec<_>>(),
    })
}

fn blaschke_json(b: &FiniteBlaschke) -> Value {
    serde_json::to_value(FiniteBlaschkeJson::from(b)).unwrap_or(Value::Null)
}

fn measure_json(m: &AtomicMeasure) -> Value {
    serde_json::to_value(AtomicMeasureJson::from(m)).unwrap_or(Value::Null)
}

fn tol_json(t: &Tolerance) -> Value {
    json!({"rank_eps": t.rank_eps, "residual_eps": t.residual_eps})
}

fn file(path: &Path) -> Value {
    json!(path.display().to_string())
}

fn samples(s: &Settings, default: usize) -> Outcome<Vec<Complex64>> {
    match s.samples.unwrap_or(default) {
        0 => Err(Failure::Input("--samples must be at least 1".into())),
        n => Ok(sample_points(n)),
    }
}

pub fn analyze(s: &Settings, path: &Path) -> Outcome<Report> {
    let (m, tol) = input::matrix(path, s.tol)?;
    let inputs = json!({"matrix": file(path), "tol": tol_json(&tol)});
    let v = match PartialIsometry::validate(m.clone(), tol) {
        Ok(v) => v,
        Err(Error::NotPartialIsometry { residual }) => {
            return Ok(Report {
                inputs,
                result: json!({"valid": false, "dim": m.nrows(), "residual": residual}),
                csv: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let residual = (&m * m.adjoint() * &m - &m).norm();
    let (np, nm) = v.deficiency_indices();
    let status = v.is_completely_non_unitary()?;
    let mut spectrum = v.spectrum()?;
    spectrum.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(Report {
        inputs,
        result: json!({
            "valid": true,
            "dim": v.dim(),
            "rank": v.initial_space().ncols(),
            "residual": residual,
            "indices": [np, nm],
            "cnu": status.is_cnu(),
            "cnu_status": status.label(),
            "spectrum": spectrum.iter().map(|&z| pair(z)).collect::<Vec<_>>(),
        }),
        csv: None,
    })
}

fn char_fn(v: &PartialIsometry, route: RouteArg) -> Outcome<CharFn> {
    Ok(match route {
        RouteArg::Extension => CharFn::extension(v)?,
        RouteArg::Defect => CharFn::defect(v)?,
    })
}

pub fn charfn(s: &Settings, path: &Path, route: RouteArg) -> Outcome<Report> {
    let v = input::partial_isometry(path, s.tol)?;
    let w = char_fn(&v, route)?;
    let mut out = Vec::new();
    let mut rows = Vec::new();
    for z in samples(s, DEFAULT_SAMPLES)? {
        let wz = w.eval(z)?;
        let sv = singular_values(&wz);
        let mut row = vec![z.re, z.im, z.norm()];
        row.extend(&sv);
        rows.push(row);
        out.push(json!({"z": cz(z), "w": mat(&wz), "singular_values": sv}));
    }
    let mut header: Vec<String> = ["re", "im", "abs"].iter().map(|h| h.to_string()).collect();
    header.extend((1..=w.size()).map(|k| format!("sv{k}")));
    let label = match route {
        RouteArg::Extension => "extension",
        RouteArg::Defect => "defect",
    };
    Ok(Report {
        inputs: json!({"matrix": file(path), "tol": tol_json(v.tol())}),
        result: json!({"route": label, "size": w.size(), "samples": out}),
        csv: Some((header, rows)),
    })
}

fn coincidence_json(c: &Coincidence) -> Value {
    match c {
        Coincidence::Coincident { q1, q2, residual } => json!({
            "outcome": c.label(), "residual": residual, "q1": mat(q1), "q2": mat(q2),
        }),
        Coincidence::NotCoincident { witness, gap } => json!({
            "outcome": c.label(), "witness": cz(*witness), "gap": gap,
        }),
        Coincidence::Undetermined { residual } => json!({
            "outcome": c.label(), "residual": residual,
        }),
    }
}

pub fn compare(s: &Settings, pa: &Path, pb: &Path, budget: usize) -> Outcome<Report> {
    let a = input::partial_isometry(pa, s.tol)?;
    let b = input::partial_isometry(pb, s.tol)?;
    let leq_v = leq(&a, &b, budget, s.seed)?;
    let leq_q_v = leq_q(&a, &b, s.seed)?;
    let hm = hm_order(&a, &b)?.holds();

    let k = a.deficiency_indices().0;
    let needed = 2 * k * k;
    let count = match s.samples {
        Some(n) if n < needed => {
            return Err(Failure::Input(format!(
                "compare needs at least {needed} samples for index {k}, got {n}"
            )))
        }
        Some(n) => n,
        None => DEFAULT_SAMPLES.max(needed + 1),
    };
    let wa = CharFn::extension(&a)?;
    let wb = CharFn::extension(&b)?;
    let co = coincide(&wa, &wb, &sample_points(count), a.tol(), s.seed)?;

    let sim = if k == 1 && a.dim() == b.dim() {
        json!(sim_check(&a, &b)?)
    } else {
        Value::Null
    };
    let sim_q = if a.dim() == b.dim() {
        simq_check(&a, &b, s.seed)?.to_json()
    } else {
        Value::Null
    };
    Ok(Report {
        inputs: json!({
            "a": file(pa), "b": file(pb),
            "tol_a": tol_json(a.tol()), "tol_b": tol_json(b.tol()),
            "samples": count, "budget": budget,
        }),
        result: json!({
            "hm": hm,
            "leq": leq_v.to_json(),
            "leq_q": leq_q_v.to_json(),
            "coincide": coincidence_json(&co),
            "sim": sim,
            "sim_q": sim_q,
        }),
        csv: None,
    })
}

pub fn blaschke(s: &Settings, path: &Path) -> Outcome<Report> {
    let b = input::blaschke(path)?;
    let basis = tm_basis(&b)?;
    let n = basis.dim();
    let gram_residual = (basis.gram() - CMatrix::identity(n, n)).norm();
    let (kind, model) = if b.vanishes_at_zero() {
        ("compressed_shift", compressed_shift(&b, s.tol)?)
    } else {
        ("multiplication", mult_partial_isometry(&b, s.tol)?)
    };
    let a = b.eval(ZERO);
    let (shifted, multiplier) = crofoot(&b, a)?;
    let crofoot_gap = isometry_gap(&b, &multiplier)?;

    // the model operator is a compressed shift on K_B or, via Crofoot, on
    // K_{B_a}; its characteristic function matches that inner function up
    // to a unimodular constant
    let realised = if b.vanishes_at_zero() { &b } else { &shifted };
    let w = CharFn::defect(&model)?;
    let mut out = Vec::new();
    let mut modulus_gap: f64 = 0.0;
    for z in samples(s, DEFAULT_SAMPLES)? {
        let bz = b.eval(z);
        let wz = w.eval(z)?[(0, 0)];
        modulus_gap = modulus_gap.max((wz.norm() - realised.eval(z).norm()).abs());
        out.push(json!({"z": cz(z), "b": cz(bz), "w": cz(wz)}));
    }
    Ok(Report {
        inputs: json!({"blaschke": file(path), "tol": tol_json(&s.tol)}),
        result: json!({
            "degree": b.degree(),
            "gram_residual": gram_residual,
            "shift_matrix": mat(&shift_matrix(&basis)),
            "model_operator": {"kind": kind, "matrix": mat(model.matrix())},
            "crofoot": {
                "a": cz(a),
                "transformed": blaschke_json(&shifted),
                "multiplier": rational(&multiplier),
                "isometry_gap": crofoot_gap,
            },
            "realised_inner": blaschke_json(realised),
            "modulus_gap": modulus_gap,
            "samples": out,
        }),
        csv: None,
    })
}

/// `max |(1 - |phi|^2) / |1 - phi|^2 - P_mu|` over the sample points.
fn poisson_residual(phi: &FiniteBlaschke, mu: &AtomicMeasure, pts: &[Complex64]) -> f64 {
    pts.iter()
        .map(|&z| {
            let p = phi.eval(z);
            ((1.0 - p.norm_sqr()) / (ONE - p).norm_sqr() - mu.poisson(z)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn clark(s: &Settings, path: Option<&Path>, carrier: &[i64]) -> Outcome<Report> {
    let Some(path) = path else {
        let mu = carrier_measure(carrier)?;
        let phi = inner_from_measure(&mu)?;
        let residual = quadrature_isometry_check(&atomic_singular_inner, &phi, QUADRATURE_TOL)?;
        return Ok(Report {
            inputs: json!({"carrier": carrier}),
            result: json!({
                "mode": "carrier",
                "measure": measure_json(&mu),
                "inner": blaschke_json(&phi),
                "quadrature_tol": QUADRATURE_TOL,
                "isometry_residual": residual,
            }),
            csv: None,
        });
    };
    let text = input::read(path)?;
    let value: Value = input::parse(path, &text)?;
    let pts = samples(s, DEFAULT_SAMPLES)?;
    let result = if value.get("atoms").is_some() {
        let mu = input::measure_text(path, &text)?;
        let phi = inner_from_measure(&mu)?;
        let back = clark_measure(&phi)?;
        json!({
            "mode": "measure",
            "measure": measure_json(&mu),
            "inner": blaschke_json(&phi),
            "round_trip": measure_json(&back),
            "round_trip_distance": mu.distance(&back),
            "poisson_residual": poisson_residual(&phi, &mu, &pts),
        })
    } else {
        let b = input::blaschke_text(path, &text)?;
        let mu = clark_measure(&b)?;
        let phi = inner_from_measure(&mu)?;
        let back = clark_measure(&phi)?;
        json!({
            "mode": "blaschke",
            "blaschke": blaschke_json(&b),
            "measure": measure_json(&mu),
            "total_mass": mu.total_mass(),
            "inner": blaschke_json(&phi),
            "round_trip_distance": mu.distance(&back),
            "poisson_residual": poisson_residual(&b, &mu, &pts),
        })
    };
    Ok(Report {
        inputs: json!({"input": file(path)}),
        result,
        csv: None,
    })
}

pub fn kernels(s: &Settings, path: &Path) -> Outcome<Report> {
    let v = input::partial_isometry(path, s.tol)?;
    let frame = ModelFrame::new(&v)?;
    let tol = *v.tol();
    let pts = samples(s, KERNEL_SAMPLES)?;
    let mut pairs = Vec::new();
    let (mut kernel_gap, mut multiplier_gap): (f64, f64) = (0.0, 0.0);
    for &z in &pts {
        for &w in &pts {
            let g = gamma_kernel(&frame, z, w)?;
            let k = abstract_kernel(&frame, z, w)?;
            let kg = (&g - &k).norm();
            let mg = multiplier_identity_gap(&frame, z, w)?;
            kernel_gap = kernel_gap.max(kg);
            multiplier_gap = multiplier_gap.max(mg);
            pairs.push(json!({
                "z": cz(z), "w": cz(w),
                "gamma": mat(&g), "abstract": mat(&k),
                "kernel_gap": kg, "multiplier_gap": mg,
            }));
        }
    }
    let symbol = |z: Complex64| frame_symbol(&frame, z);
    let twist = Complex64::from_polar(1.0, REFLECTION_TWIST);
    let mut mixed = pts.clone();
    mixed.extend(
        pts.iter()
            .filter(|z| z.norm() > 0.0)
            .map(|&z| twist / z.conj()),
    );
    let margin = |m: CMatrix| json!({"min_eigenvalue": psd_margin(&m), "norm": m.norm()});
    let grams = json!({
        "gamma": margin(kernel_gram(&pts, &|z, w| gamma_kernel(&frame, z, w))?),
        "abstract": margin(kernel_gram(&pts, &|z, w| abstract_kernel(&frame, z, w))?),
        "herglotz_inside": margin(kernel_gram(&pts, &|z, w| herglotz_kernel(&symbol, z, w, &tol))?),
        "herglotz_mixed": margin(kernel_gram(&mixed, &|z, w| herglotz_kernel(&symbol, z, w, &tol))?),
    });
    Ok(Report {
        inputs: json!({"matrix": file(path), "tol": tol_json(&tol)}),
        result: json!({
            "size": frame.size(),
            "kernel_gap": kernel_gap,
            "multiplier_gap": multiplier_gap,
            "psd_margins": grams,
            "pairs": pairs,
        }),
        csv: None,
    })
}
