//! Temporary exploration harness (not part of the test suite contract).

use circtrend::bandwidth::{
    case_score, default_init_h, evaluate_criterion, SelectionCriterion,
};
use circtrend::estimator::fit_surface;
use circtrend::simulate::{
    generate_sample, replicate_rng, CorrelationModel, Design, ErrorProcess, ScenarioSpec,
    TrendFunction, WrappedGpSpec,
};
use circtrend::{AngularSample, BandwidthMatrix, Degree, KernelSpec, Locations};

fn scenario(design: Design, n: usize) -> ScenarioSpec {
    ScenarioSpec {
        trend: TrendFunction::R1,
        n,
        design,
        errors: ErrorProcess::Wrapped(
            WrappedGpSpec::new(0.0, 1.0, CorrelationModel::exponential(0.1).unwrap()).unwrap(),
        ),
        seed: 0,
    }
}

fn grid_locations(side: usize, convention: &str) -> Locations {
    let mut coords = Vec::new();
    for ix in 0..side {
        for iy in 0..side {
            let (x, y) = match convention {
                "centers" => (
                    (ix as f64 + 0.5) / side as f64,
                    (iy as f64 + 0.5) / side as f64,
                ),
                "left" => (ix as f64 / side as f64, iy as f64 / side as f64),
                _ => (
                    ix as f64 / (side as f64 - 1.0),
                    iy as f64 / (side as f64 - 1.0),
                ),
            };
            coords.push(x);
            coords.push(y);
        }
    }
    Locations::new(2, coords).unwrap()
}

/// Plain Nelder–Mead on the log-diagonal (2 parameters).
fn nm_diag(
    sample: &AngularSample,
    spec: &KernelSpec,
    degree: Degree,
    criterion: &SelectionCriterion,
    init: &BandwidthMatrix,
) -> BandwidthMatrix {
    let f = |theta: &[f64]| -> f64 {
        let h = BandwidthMatrix::diagonal(&[theta[0].exp(), theta[1].exp()]).unwrap();
        evaluate_criterion(sample, spec, degree, criterion, &h).unwrap()
    };
    let x0 = vec![init.entry(0, 0).ln(), init.entry(1, 1).ln()];
    let mut simplex = vec![x0.clone()];
    for i in 0..2 {
        let mut v = x0.clone();
        v[i] += 0.05 * v[i].abs().max(0.00025);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    for _ in 0..400 {
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[2] - values[0]).abs() < 1e-8 {
            break;
        }
        let centroid: Vec<f64> =
            (0..2).map(|j| (simplex[0][j] + simplex[1][j]) / 2.0).collect();
        let refl: Vec<f64> =
            (0..2).map(|j| centroid[j] + (centroid[j] - simplex[2][j])).collect();
        let fr = f(&refl);
        if fr < values[0] {
            let exp: Vec<f64> =
                (0..2).map(|j| centroid[j] + 2.0 * (centroid[j] - simplex[2][j])).collect();
            let fe = f(&exp);
            if fe < fr {
                simplex[2] = exp;
                values[2] = fe;
            } else {
                simplex[2] = refl;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = refl;
            values[2] = fr;
        } else {
            let (cand, fc) = if fr < values[2] {
                let c: Vec<f64> =
                    (0..2).map(|j| centroid[j] + 0.5 * (refl[j] - centroid[j])).collect();
                let v = f(&c);
                (c, v)
            } else {
                let c: Vec<f64> =
                    (0..2).map(|j| centroid[j] + 0.5 * (simplex[2][j] - centroid[j])).collect();
                let v = f(&c);
                (c, v)
            };
            if fc < values[2].min(fr) {
                simplex[2] = cand;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    let s: Vec<f64> = (0..2)
                        .map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]))
                        .collect();
                    values[i] = f(&s);
                    simplex[i] = s;
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    BandwidthMatrix::diagonal(&[simplex[best][0].exp(), simplex[best][1].exp()]).unwrap()
}

#[test]
fn probe_nm_selection() {
    let spec = KernelSpec::product_triweight(2).unwrap();
    let degree = Degree::Constant;
    for (label, design) in [
        ("centers", Design::Explicit(grid_locations(10, "centers"))),
        ("inclusive", Design::UnitSquareGrid),
    ] {
        let sc = scenario(design, 100);
        let radii = [0.0, 0.1415, 0.2829, 0.4244];
        let mut sums = [0.0f64; 4];
        let mut sums_sq = [0.0f64; 4];
        let reps = 100;
        for r in 0..reps {
            let mut rng = replicate_rng(20260810, r);
            let (sample, truth) = generate_sample(&sc, &mut rng).unwrap();
            let init = default_init_h(&sample).unwrap();
            for (k, &radius) in radii.iter().enumerate() {
                let criterion = if radius == 0.0 {
                    SelectionCriterion::Cv
                } else {
                    SelectionCriterion::Mcv { radius }
                };
                let h = nm_diag(&sample, &spec, degree, &criterion, &init);
                let fits =
                    fit_surface(&sample, &spec, &h, sample.locations(), degree).unwrap();
                let case = case_score(&truth, &fits).unwrap();
                sums[k] += case;
                sums_sq[k] += case * case;
            }
        }
        print!("{label} NM-diag: ");
        for k in 0..4 {
            let mean = sums[k] / reps as f64;
            let var = (sums_sq[k] / reps as f64 - mean * mean) / (reps as f64 - 1.0);
            print!("{:.4}±{:.4} ", mean, var.max(0.0).sqrt());
        }
        println!("  [refs: 0.2087 0.0902 0.0721 0.0609]");
    }
}
