//! Fast invariant battery over every module. Each check prints one row;
//! any failure flips the exit status.

use kdqi::cost::{reference_frontier, CostModel};
use kdqi::headmass::{empirical_isotropy, isotropy_ceiling, pipeline_report};
use kdqi::io::{read_spectrum, split_seed, spectrum_from_json, spectrum_to_json, write_spectrum};
use kdqi::kernels::{synthesized_matches_diagonal, KernelSpec};
use kdqi::ldpc::{
    bla_tangency_check, build_code, de_threshold, fer_scan, Channel, LdpcEnsemble,
};
use kdqi::noise::{apply_channel, NoiseModel, Tau};
use kdqi::opi::{opi_shaped_state, ppc_check, truncated_tail, OpiInstance};
use kdqi::spectral::{fourier, fourier_inverse};
use kdqi::variational::{gradient_bound_check, VariationalAnsatz};

use crate::output::Table;
use crate::CliError;

type Check = (&'static str, fn(u64) -> Result<String, String>);

fn fourier_round_trip(_seed: u64) -> Result<String, String> {
    let inst = OpiInstance::quadratic(13, 5, 3, 1).map_err(|e| e.to_string())?;
    let g = opi_shaped_state(&inst).map_err(|e| e.to_string())?;
    let alpha = fourier(&g).map_err(|e| e.to_string())?;
    if !alpha.is_normalized(1e-10) {
        return Err("transform broke normalization".into());
    }
    let back = fourier_inverse(&alpha).map_err(|e| e.to_string())?;
    let worst = g
        .amps()
        .iter()
        .zip(back.amps())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0f64, f64::max);
    if worst > 1e-9 {
        return Err(format!("round trip error {worst}"));
    }
    Ok(format!("round trip error {worst:.2e}"))
}

fn ppc_exact(_seed: u64) -> Result<String, String> {
    let inst = OpiInstance::quadratic(31, 6, 9, 3).map_err(|e| e.to_string())?;
    let out = ppc_check(&inst, 6).map_err(|e| e.to_string())?;
    if out.mode != 9 {
        return Err(format!("tuned mode {} instead of 9", out.mode));
    }
    if (out.top_mass - 1.0).abs() > 1e-12 {
        return Err(format!("tuned mass {}", out.top_mass));
    }
    Ok(format!("mode {} mass {}", out.mode, out.top_mass))
}

fn truncation_tail(_seed: u64) -> Result<String, String> {
    let inst = OpiInstance::truncated(31, 13, 6, 9, 3).map_err(|e| e.to_string())?;
    let tail = truncated_tail(&inst).map_err(|e| e.to_string())?;
    let want = 1.0 - 13.0 / 31.0;
    if (tail - want).abs() > 1e-12 {
        return Err(format!("tail {tail} instead of {want}"));
    }
    Ok(format!("tail {tail}"))
}

fn erasure_threshold(_seed: u64) -> Result<String, String> {
    let ens = LdpcEnsemble::new(3, 6).map_err(|e| e.to_string())?;
    let found = de_threshold(ens, 1e-6).map_err(|e| e.to_string())?;
    if (found.eps_star - 0.42944).abs() > 1e-3 {
        return Err(format!("threshold {}", found.eps_star));
    }
    Ok(format!("eps_star {:.5}", found.eps_star))
}

fn tangency_identities(_seed: u64) -> Result<String, String> {
    let ens = LdpcEnsemble::new(3, 6).map_err(|e| e.to_string())?;
    let report = bla_tangency_check(ens, 1.0, 0.04).map_err(|e| e.to_string())?;
    if report.value_gap > 1e-12 || report.deriv_gap > 1e-12 {
        return Err(format!(
            "identity gaps {} and {}",
            report.value_gap, report.deriv_gap
        ));
    }
    if !report.post_shift_converges {
        return Err("post-shift recursion failed to drain".into());
    }
    Ok(format!("gaps {:.1e} / {:.1e}", report.value_gap, report.deriv_gap))
}

fn peeling_decoder(seed: u64) -> Result<String, String> {
    let ens = LdpcEnsemble::new(3, 6).map_err(|e| e.to_string())?;
    let code =
        build_code(ens, 512, split_seed(seed, "selftest-code", 0)).map_err(|e| e.to_string())?;
    let scan = fer_scan(&code, &[Channel::Bec { eps: 0.25 }], 20, 60, seed)
        .map_err(|e| e.to_string())?;
    let fer = scan.rows[0].fer;
    if fer > 0.2 {
        return Err(format!("erasure FER {fer} far below threshold"));
    }
    Ok(format!("FER {fer} at eps 0.25"))
}

fn gradient_bound(seed: u64) -> Result<String, String> {
    let inst = OpiInstance::quadratic(31, 6, 9, 3).map_err(|e| e.to_string())?;
    let ansatz =
        VariationalAnsatz::new(inst, 1, NoiseModel::noiseless()).map_err(|e| e.to_string())?;
    let samples = gradient_bound_check(&ansatz, 20, (5.15, 6.85), (-1.3, 1.3), 0.02, seed)
        .map_err(|e| e.to_string())?;
    match samples.iter().find(|s| !s.within_bound()) {
        Some(bad) => Err(format!(
            "gradient ({}, {}) broke the generator bound",
            bad.grad1, bad.grad2
        )),
        None => Ok(format!("{} samples inside 2|G|", samples.len())),
    }
}

fn frontier_ordering(_seed: u64) -> Result<String, String> {
    let rows = reference_frontier(&CostModel::default()).map_err(|e| e.to_string())?;
    let gain = |label: &str| {
        rows.iter()
            .find(|r| r.label == label)
            .map(|r| r.gain)
            .ok_or_else(|| format!("missing row {label}"))
    };
    let baseline = gain("baseline")?;
    let mistuned = gain("mistuned-global")?;
    let block = gain("block-local")?;
    let tuned = gain("tuned-global")?;
    if !(baseline < block && block < tuned) {
        return Err(format!("gain ordering broke: {baseline} / {block} / {tuned}"));
    }
    if mistuned.abs() > 1e-9 {
        return Err(format!("mistuned gain {mistuned}"));
    }
    Ok(format!("gains 0 < {block:.3} < {tuned:.3}, mistuned {mistuned:.1e}"))
}

fn spectrum_io(_seed: u64) -> Result<String, String> {
    let inst = OpiInstance::quadratic(13, 5, 3, 1).map_err(|e| e.to_string())?;
    let g = opi_shaped_state(&inst).map_err(|e| e.to_string())?;
    let path =
        std::env::temp_dir().join(format!("kdqi-selftest-{}.spectrum", std::process::id()));
    let result = (|| -> Result<(), String> {
        let file = std::fs::File::create(&path).map_err(|e| e.to_string())?;
        write_spectrum(file, &g).map_err(|e| e.to_string())?;
        let file = std::fs::File::open(&path).map_err(|e| e.to_string())?;
        let back = read_spectrum(file).map_err(|e| e.to_string())?;
        let worst = g
            .amps()
            .iter()
            .zip(back.amps())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0f64, f64::max);
        if worst > 0.0 {
            return Err(format!("binary container drifted by {worst}"));
        }
        let json = spectrum_to_json(&g).map_err(|e| e.to_string())?;
        let back = spectrum_from_json(&json).map_err(|e| e.to_string())?;
        if back.amps() != g.amps() {
            return Err("json mirror drifted".into());
        }
        Ok(())
    })();
    let _ = std::fs::remove_file(&path);
    result.map(|()| "binary and json round trips exact".to_string())
}

fn noise_soundness(seed: u64) -> Result<String, String> {
    let inst = OpiInstance::quadratic(13, 5, 3, 1).map_err(|e| e.to_string())?;
    let g = opi_shaped_state(&inst).map_err(|e| e.to_string())?;
    let kernel = KernelSpec::chirp([0, 0, 1], -5.0);
    let nm = NoiseModel::new(0.2, 1, Tau::Constant(1.0), split_seed(seed, "selftest-mix", 0))
        .map_err(|e| e.to_string())?;
    let report = pipeline_report(&g, &kernel, &nm, 2).map_err(|e| e.to_string())?;
    let alpha = kdqi::kernels::interfere(&kernel, &g).map_err(|e| e.to_string())?;
    let channel = apply_channel(&nm, &alpha).map_err(|e| e.to_string())?;
    let delivered: f64 = report.head.indices().iter().map(|&s| channel.probs[s]).sum();
    let floor = report.sigma_k - channel.leakage - 1e-9;
    if delivered < floor {
        return Err(format!("delivered {delivered} under floor {floor}"));
    }
    Ok(format!("delivered {delivered:.4} >= floor {floor:.4}"))
}

fn isotropy(_seed: u64) -> Result<String, String> {
    let inst = OpiInstance::quadratic(31, 6, 9, 3).map_err(|e| e.to_string())?;
    let g = opi_shaped_state(&inst).map_err(|e| e.to_string())?;
    let kernel = KernelSpec::chirp([0, 0, 1], -6.0);
    let nm = NoiseModel::depolarizing(0.1).map_err(|e| e.to_string())?;
    let d = 1;
    let report = pipeline_report(&g, &kernel, &nm, d).map_err(|e| e.to_string())?;
    let alpha = kdqi::kernels::interfere(&kernel, &g).map_err(|e| e.to_string())?;
    let n = alpha.len();
    let delta = empirical_isotropy(&alpha);
    let eta_max =
        (0..n).map(|s| nm.eta_k(alpha.domain(), s)).fold(0.0f64, f64::max);
    let ceiling = isotropy_ceiling(delta, d, eta_max, n);
    if report.sigma_k > ceiling + 1e-12 {
        return Err(format!("sigma {} above ceiling {}", report.sigma_k, ceiling));
    }
    Ok(format!("sigma {:.4} <= ceiling {:.4}", report.sigma_k, ceiling))
}

fn chirp_synthesis(_seed: u64) -> Result<String, String> {
    match synthesized_matches_diagonal(0.37, 6) {
        Ok(true) => Ok("rotation list matches the diagonal on 6 qubits".into()),
        Ok(false) => Err("rotation list diverged from the diagonal".into()),
        Err(e) => Err(e.to_string()),
    }
}

pub fn selftest(seed: u64) -> Result<(Table, usize), CliError> {
    let checks: &[Check] = &[
        ("fourier-round-trip", fourier_round_trip),
        ("ppc-exact", ppc_exact),
        ("truncated-tail", truncation_tail),
        ("erasure-threshold", erasure_threshold),
        ("tangency-identities", tangency_identities),
        ("peeling-decoder", peeling_decoder),
        ("gradient-bound", gradient_bound),
        ("frontier-ordering", frontier_ordering),
        ("spectrum-io", spectrum_io),
        ("noise-soundness", noise_soundness),
        ("isotropy-ceiling", isotropy),
        ("chirp-synthesis", chirp_synthesis),
    ];
    let mut table = Table::new(&["check", "status", "detail"]);
    let mut failures = 0usize;
    for (name, check) in checks {
        match check(seed) {
            Ok(detail) => table.push_row(vec![name.to_string(), "ok".into(), detail]),
            Err(msg) => {
                failures += 1;
                table.push_row(vec![name.to_string(), "fail".into(), msg]);
            }
        }
    }
    table.add_summary("checks", table.rows.len());
    table.add_summary("failures", failures);
    Ok((table, failures))
}
