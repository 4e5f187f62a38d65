//! Fixed reproduction pipeline: generates a small corpus, runs the main
//! operations on it and writes every report under the output directory.
//! Identical seed and configuration must give byte-identical files.

use std::fs;
use std::path::Path;

use w11ext_core::corpus::{generate, CorpusSpec, Family};
use w11ext_core::dyadic::{strip_extension, StripParams};
use w11ext_core::energy::{asymptotic_mean, integral_dist_to_point, theta, Quadrature};
use w11ext_core::error::{Error, Result};
use w11ext_core::num::Norm;
use w11ext_core::trace::{trace_inequality_check, trace_slice, Side};

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::schema(format!("write {}: {e}", path.display())))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization") + "\n"
}

pub fn run(seed: u64, out: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(out).map_err(|e| Error::schema(format!("mkdir {}: {e}", out.display())))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, text: String| -> Result<()> {
        write(&out.join(name), text)?;
        written.push(name.to_string());
        Ok(())
    };

    let fixtures = [
        ("bump1d", CorpusSpec {
            family: Family::SingleBump,
            manifold_id: "circle".into(),
            counts: vec![32],
            h: 1.0,
            origin: None,
            seed,
        }),
        ("multi1d", CorpusSpec {
            family: Family::MultiBump { bumps: 3 },
            manifold_id: "sphere:3".into(),
            counts: vec![32],
            h: 1.0,
            origin: None,
            seed: seed + 1,
        }),
        ("smooth2d", CorpusSpec {
            family: Family::SmoothSampled,
            manifold_id: "circle".into(),
            counts: vec![16, 16],
            h: 1.0,
            origin: None,
            seed: seed + 2,
        }),
    ];

    let mut maps = Vec::new();
    for (name, spec) in &fixtures {
        let u = generate(spec)?;
        emit(&format!("{name}.json"), u.to_json() + "\n")?;
        maps.push((name.to_string(), u));
    }

    let mut csv = String::from("name,value\n");
    for (name, u) in &maps {
        let e = integral_dist_to_point(u, &u.tail_point())?;
        csv.push_str(&format!("energy_{name},{}\n", e.value));
        for r in [3.5, 7.0, 14.0] {
            let t = theta(u, r, Norm::Euclidean, Quadrature::Midpoint)?;
            csv.push_str(&format!("theta_{name}@{r},{}\n", t.value));
        }
    }

    // asymptotic mean on the 1-d fixtures
    for (name, u) in maps.iter().take(2) {
        let diam = u.window_diameter(Norm::Euclidean);
        let schedule: Vec<f64> = [2.5, 5.0, 10.0, 25.0, 100.0].iter().map(|c| c * diam).collect();
        let rep = asymptotic_mean(u, &schedule)?;
        emit(&format!("bbm_{name}.json"), json(&rep))?;
        csv.push_str(&format!("bbm_lhs_{name},{}\n", rep.lhs));
        csv.push_str(&format!("bbm_rhs_{name},{}\n", rep.rhs.last().unwrap()));
    }

    // strip extension joining the two 1-d fixtures (equal tails by
    // construction: both families share the base point)
    let u0 = &maps[0].1;
    let circle_multi = CorpusSpec {
        family: Family::MultiBump { bumps: 2 },
        manifold_id: "circle".into(),
        counts: vec![32],
        h: 1.0,
        origin: None,
        seed: seed + 3,
    };
    let u1 = generate(&circle_multi)?;
    emit("multi1d_circle.json", u1.to_json() + "\n")?;
    // n_max = 2 keeps the thinnest layer at >= L/16, which h_fine = L/64
    // always resolves
    let params = StripParams {
        l: 8.0,
        n_max: 2,
        h_fine: 0.125,
        schedule: Default::default(),
    };
    let ext = strip_extension(u0, &u1, &params)?;
    emit("strip_report.json", json(&ext.report))?;
    emit("strip_slab.json", ext.slab.to_json() + "\n")?;
    csv.push_str(&format!("strip_gamma,{}\n", ext.report.gamma));
    csv.push_str(&format!("strip_energy,{}\n", ext.report.gradient_energy));
    csv.push_str(&format!("strip_jump_total,{}\n", ext.report.jump.total));

    // trace inequality check against the bottom trace
    let bottom = trace_slice(&ext.slab, Side::Bottom);
    let trep = trace_inequality_check(&ext.slab, &bottom, &[1.0, 2.0, 4.0])?;
    emit("trace_report.json", json(&trep))?;
    for (k, r) in trep.r.iter().enumerate() {
        csv.push_str(&format!("trace_ratio_pairs@{r},{}\n", trep.ratio_boundary_pairs[k]));
    }

    // small-r sweep on the 2-d fixture
    let smooth2d = &maps[2].1;
    let sweep = w11ext_core::energy::small_r_sweep(
        smooth2d,
        &[8.0, 4.0, 2.0],
        Norm::Euclidean,
        Quadrature::Midpoint,
    )?;
    for (r, v) in &sweep {
        csv.push_str(&format!("sweep_smooth2d@{r},{v}\n"));
    }

    // half-space extension of the bump fixture
    let (_, half) = w11ext_core::dyadic::halfspace_extension(u0, &params, None)?;
    emit("halfspace_report.json", json(&half))?;
    csv.push_str(&format!("halfspace_energy,{}\n", half.strip.gradient_energy));
    csv.push_str(&format!("halfspace_theta_limit,{}\n", half.theta_limit));

    // cube extension with a bump on the top face
    let face = generate(&CorpusSpec {
        family: Family::SingleBump,
        manifold_id: "circle".into(),
        counts: vec![8],
        h: 0.25,
        origin: None,
        seed: seed + 4,
    })?;
    let boundary = w11ext_core::dyadic::CubeBoundary {
        faces: vec![None, None, None, Some(face)],
    };
    let base = w11ext_core::Point(vec![1.0, 0.0]);
    let (_, cube) = w11ext_core::dyadic::cube_extension(
        &boundary,
        &base,
        2,
        1.0 / 32.0,
        &Default::default(),
    )?;
    emit("cube_report.json", json(&cube))?;
    csv.push_str(&format!("cube_energy,{}\n", cube.gradient_energy));
    csv.push_str(&format!("cube_boundary_l1,{}\n", cube.boundary_l1));

    emit("summary.csv", csv)?;
    Ok(written)
}
