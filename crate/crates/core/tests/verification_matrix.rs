//! Every certified bound must survive the numerical checks on every model
//! of the matrix.

use curvlab::cayley::cayley_epsilon;
use curvlab::criteria::{epsilon_corollary, lambda_criterion, split_lambda_criterion};
use curvlab::models::{
    build_curie_weiss, build_graph_hardcore, build_ising, build_lattice_ising, build_rods,
    hypercube, symmetric_group_walk, Graph, IsingSpec, Lattice, Model, ModelDetails,
};
use curvlab::verify::{verify, HessianForm, SamplingConfig};
use curvlab::CurvatureCertificate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn certificates(m: &Model) -> Vec<CurvatureCertificate> {
    let (rep, pi) = (&m.rep, m.chain.pi());
    let mut out = vec![lambda_criterion(rep, pi).unwrap()];
    match &m.details {
        ModelDetails::HardCore(d) => {
            out.push(split_lambda_criterion(rep, pi, &d.creations, &d.annihilations).unwrap())
        }
        ModelDetails::Cayley { walk, .. } => out.push(cayley_epsilon(walk).unwrap()),
        _ => {}
    }
    if rep.all_involutive() {
        out.push(epsilon_corollary(rep, pi).unwrap());
    }
    out.into_iter().filter(|c| c.valid).collect()
}

fn matrix() -> Vec<(&'static str, Model)> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    vec![
        ("hypercube", hypercube(4, 0.6).unwrap()),
        (
            "ising",
            build_ising(&IsingSpec::random(4, 0.5, 0.1, &mut rng).unwrap()).unwrap(),
        ),
        ("curie_weiss", build_curie_weiss(5, 0.1).unwrap()),
        (
            "lattice",
            build_lattice_ising(&Lattice::block(2, 2).unwrap(), 0.05).unwrap(),
        ),
        ("star", build_graph_hardcore(&Graph::star(3), 0.1).unwrap()),
        (
            "cycle",
            build_graph_hardcore(&Graph::cycle(5).unwrap(), 0.1).unwrap(),
        ),
        ("path", build_graph_hardcore(&Graph::path(4), 0.2).unwrap()),
        ("rods", build_rods(3, 2, 0.02).unwrap()),
        ("transpositions", symmetric_group_walk(4, 2).unwrap()),
        ("three_cycles", symmetric_group_walk(4, 3).unwrap()),
    ]
}

#[test]
fn every_certificate_passes_every_check() {
    let config = SamplingConfig {
        samples: 400,
        seed: 5,
        refine: 3,
    };
    for (name, m) in matrix() {
        let certs = certificates(&m);
        assert!(!certs.is_empty(), "{name}: no valid certificate");
        for cert in certs {
            let kappa = cert.bound.unwrap();
            let report = verify(&m.chain, &m.rep, kappa, &config, HessianForm::Fast).unwrap();
            for check in &report.checks {
                assert!(
                    check.slack >= -1e-8,
                    "{name}/{}: {} = {} below {}",
                    cert.criterion.name(),
                    check.name,
                    check.value,
                    check.required
                );
            }
        }
    }
}

#[test]
fn same_seed_gives_identical_reports() {
    let config = SamplingConfig {
        samples: 300,
        seed: 8,
        refine: 2,
    };
    let m = build_curie_weiss(4, 0.2).unwrap();
    let run = || {
        serde_json::to_string(&verify(&m.chain, &m.rep, 1.0, &config, HessianForm::Fast).unwrap())
            .unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn sample_minimum_only_decreases_with_more_samples() {
    let m = build_graph_hardcore(&Graph::cycle(5).unwrap(), 0.3).unwrap();
    let mut last = f64::INFINITY;
    for samples in [10, 100, 1000] {
        let config = SamplingConfig {
            samples,
            seed: 4,
            refine: 0,
        };
        let r = curvlab::verify::bochner_scan(&m.rep, m.chain.pi(), &config, HessianForm::Fast)
            .unwrap();
        assert!(r.sample_min_ratio <= last);
        last = r.sample_min_ratio;
    }
}
