//! Subcommand implementations; each returns the artifacts it produced.

use complexdim::analysis::{
    box_zeta, explicit_counting, measurability_report, minkowski_content_string, residues_at, BoxZeta, Verdict,
};
use complexdim::geometry::SelfSimilarSystem;
use complexdim::packing::{box_profile_with, ProfileOptions, RenewalTable};
use complexdim::roots::{
    classify_lattice, diophantine_sequence, lattice_roots, moran_root, nonlattice_roots, root_match, strip_left_bound,
    LatticeVerdict, RootSet, ScalingVector, Window,
};
use complexdim::scale::fmt17;
use complexdim::strings::{string_counting, FractalString};
use complexdim::zeta::{generator_zeta, zeta_eval, ZetaFunction};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::Artifact;
use crate::spec::{Model, SystemSpec};

/// Settings shared by the subcommands.
#[derive(Debug, Clone)]
pub struct Settings {
    pub depth: usize,
    pub x_max: f64,
    pub t_max: f64,
    pub terms: usize,
    pub m: usize,
    pub points: usize,
    /// Accepted chance of snapping a box-counting jump to a wrong exact value.
    pub tolerance: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            depth: 6,
            x_max: 16.5,
            t_max: 20.0,
            terms: 200,
            m: 5,
            points: 48,
            tolerance: 1e-2,
        }
    }
}

impl Settings {
    fn profile_options(&self) -> ProfileOptions {
        ProfileOptions {
            snap_confidence: self.tolerance,
            ..ProfileOptions::default()
        }
    }
}

type Out = Result<Vec<Artifact>, CliError>;

fn name_of(spec: &SystemSpec) -> Value {
    spec.name.as_ref().map_or(Value::Null, |n| json!(n))
}

fn system_of<'a>(spec: &'a SystemSpec, command: &str) -> Result<&'a SelfSimilarSystem, CliError> {
    match &spec.model {
        Model::System(s) => Ok(s),
        Model::String(_) => Err(CliError::other(format!("{command} needs a self-similar system, not a string"))),
    }
}

/// Roots of 1 − Σ r_jˢ in a window reaching left of every root, |Im| ≤ t_max.
fn roots_in(r: &ScalingVector, t_max: f64) -> Result<(RootSet, LatticeVerdict), CliError> {
    let verdict = classify_lattice(r);
    let d = moran_root(r);
    let window = Window::new(strip_left_bound(r) - 0.5, d + 0.5, t_max)?;
    let roots = match &verdict {
        LatticeVerdict::Lattice { form, .. } => lattice_roots(r, form, &window)?,
        LatticeVerdict::Nonlattice(_) => nonlattice_roots(r, &window)?,
    };
    Ok((roots, verdict))
}

fn verdict_json(v: &LatticeVerdict) -> Value {
    match v {
        LatticeVerdict::Lattice { form, exact } => json!({
            "lattice": true,
            "exact": exact,
            "base": {"value": fmt17(form.base.value()), "form": form.base.to_string()},
            "exponents": form.exponents,
            "period": fmt17(form.period()),
        }),
        LatticeVerdict::Nonlattice(n) => json!({
            "lattice": false,
            "exact": n.exact,
            "q_cap": n.q_cap,
            "best_q": n.best_q,
            "defect": fmt17(n.defect),
        }),
    }
}

pub fn dims(spec: &SystemSpec, s: &Settings) -> Out {
    let r = ScalingVector::new(spec.ratios())?;
    let d = moran_root(&r);
    let (roots, verdict) = roots_in(&r, s.t_max)?;
    let summary = json!({
        "name": name_of(spec),
        "dimension": fmt17(d),
        "verdict": verdict_json(&verdict),
        "window": {
            "sigma_min": fmt17(roots.window.sigma_min),
            "sigma_max": fmt17(roots.window.sigma_max),
            "t_max": fmt17(roots.window.t_max),
        },
        "roots": roots.roots.len(),
    });
    Ok(vec![Artifact::json("dims.json", &summary), Artifact::new("roots.csv", roots.to_csv())])
}

pub fn boxcount(spec: &SystemSpec, s: &Settings) -> Out {
    let system = system_of(spec, "boxcount")?;
    if !(s.x_max > 1.0) || s.points < 2 {
        return Err(CliError::other("boxcount needs --xmax > 1 and at least 2 points".into()));
    }
    let n = s.points - 1;
    let grid: Vec<f64> = (0..=n).map(|k| s.x_max.powf(k as f64 / n as f64)).collect();
    let profile = box_profile_with(system, s.depth, &grid, &s.profile_options())?;
    Ok(vec![Artifact::new("profile.csv", profile.to_csv())])
}

fn l_json(b: &BoxZeta) -> Value {
    json!(b
        .l
        .pieces()
        .iter()
        .map(|(a, c, v)| json!({
            "from": fmt17(*a),
            "to": if c.is_finite() { json!(fmt17(*c)) } else { json!("inf") },
            "value": v,
        }))
        .collect::<Vec<_>>())
}

pub fn zeta(spec: &SystemSpec, s: &Settings) -> Out {
    let doc = match &spec.model {
        Model::String(g) => {
            let mut v = generator_zeta(g).to_json();
            v["form"] = json!("geometric");
            v
        }
        Model::System(system) => {
            let b = box_zeta(system, s.x_max, &s.profile_options())?;
            let mut v = match b.delta {
                Some(delta) => {
                    let mut v = b.zeta.closed.to_json();
                    v["form"] = json!("closed");
                    v["delta"] = json!(fmt17(delta));
                    v
                }
                None => {
                    let mut v = b.zeta.to_json();
                    v["form"] = json!("osc");
                    v
                }
            };
            v["x1"] = json!(fmt17(b.x1));
            v["error_term"] = l_json(&b);
            v["certified_to"] = json!(fmt17(s.x_max));
            v
        }
    };
    let mut doc = doc;
    doc["name"] = name_of(spec);
    Ok(vec![Artifact::json("zeta.json", &doc)])
}

pub fn report(spec: &SystemSpec, s: &Settings) -> Out {
    let r = ScalingVector::new(spec.ratios())?;
    let d = moran_root(&r);
    let (roots, _) = roots_in(&r, s.t_max)?;
    let mut doc = match &spec.model {
        Model::String(g) => {
            let z = generator_zeta(g);
            let mut rep = measurability_report(&z, &roots, d)?;
            if rep.verdict == Verdict::Measurable {
                rep.content = Some(minkowski_content_string(&z, d)?);
            }
            let mut v = rep.to_json();
            v["content_kind"] = json!("minkowski");
            v
        }
        Model::System(system) => {
            let b = box_zeta(system, s.x_max, &s.profile_options())?;
            let mut v = measurability_report(&b.zeta, &roots, d)?.to_json();
            v["content_kind"] = json!("box-counting");
            v
        }
    };
    doc["name"] = name_of(spec);
    Ok(vec![Artifact::json("report.json", &doc)])
}

pub fn approximate(spec: &SystemSpec, s: &Settings) -> Out {
    let r = ScalingVector::new(spec.ratios())?;
    let seq = diophantine_sequence(&r, s.m)?;
    let reach = s.t_max + 1.0;
    let (original, _) = roots_in(&r, reach)?;
    let mut csv =
        String::from("m,q,q_cap,defect,matched,max_distance,mean_distance,unmatched_original,unmatched_approximant\n");
    for a in &seq {
        let left = strip_left_bound(&r).min(strip_left_bound(&a.vector)) - 0.5;
        let window = Window::new(left, moran_root(&a.vector).max(moran_root(&r)) + 0.5, reach)?;
        let approx = lattice_roots(&a.vector, &a.form, &window)?;
        let m = root_match(&original, &approx, s.t_max);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            a.m,
            a.q,
            a.q_cap,
            fmt17(a.defect),
            m.matched,
            fmt17(m.max_distance),
            fmt17(m.mean_distance),
            m.unmatched_a,
            m.unmatched_b
        ));
    }
    let last = seq.last().expect("M ≥ 1");
    let name = spec.name.as_ref().map(|n| format!("{n}-approximant-{}", s.m));
    let approximant = spec.with_ratios(last.vector.ratios(), name)?;
    Ok(vec![
        Artifact::json("approximant.json", &approximant.to_json()),
        Artifact::new("match.csv", csv),
    ])
}

pub fn explicit(spec: &SystemSpec, x: f64, s: &Settings) -> Out {
    if !(x > 0.0) {
        return Err(CliError::other("--x must be positive".into()));
    }
    let r = ScalingVector::new(spec.ratios())?;
    let (direct, value) = match &spec.model {
        Model::String(g) => {
            let z = generator_zeta(g);
            let direct = string_counting(&FractalString::self_similar(g.clone()), x)? as f64;
            (direct, formula(&z, &r, x, s)?)
        }
        Model::System(system) => {
            let b = box_zeta(system, s.x_max, &s.profile_options())?;
            let delta = b.delta.ok_or_else(|| {
                CliError::other("the explicit formula needs the closed (δ-disjoint) form of the zeta function".into())
            })?;
            let table = RenewalTable::delta_disjoint(system, delta, b.profile.step.clone())?;
            (table.count(x) as f64, formula(&b.zeta.closed, &r, x, s)?)
        }
    };
    let doc = json!({
        "name": name_of(spec),
        "x": fmt17(x),
        "terms": value.terms,
        "formula": fmt17(value.value),
        "imaginary": fmt17(value.imaginary),
        "direct": fmt17(direct),
        "difference": fmt17(value.value - direct),
    });
    Ok(vec![Artifact::json("explicit.json", &doc)])
}

fn formula<Z: ZetaFunction + Sync>(
    z: &Z,
    r: &ScalingVector,
    x: f64,
    s: &Settings,
) -> Result<complexdim::analysis::ExplicitValue, CliError> {
    let t_max = match classify_lattice(r).form() {
        Some(form) => (s.terms as f64 + 0.5) * form.period(),
        None => s.t_max,
    };
    let (roots, _) = roots_in(r, t_max)?;
    let residues = residues_at(z, &roots)?;
    let at_zero = zeta_eval(z, Complex64::new(0.0, 0.0)).ok().map(|v| v.re);
    Ok(explicit_counting(&residues, at_zero, x, s.terms)?)
}
