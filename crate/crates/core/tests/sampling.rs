use evcop_core::estimation::kendall_tau_sample;
use evcop_core::simulation::{block_maxima_of, doa_gap_husler_reiss};
use evcop_core::{
    block_maxima, doa_gap, empirical_copula_distance, sample_base, sample_ev, ArchimedeanGenerator,
    BaseCopula, BlockMaximaConfig, EvCopula, FamilyParams, RngSeed,
};

fn spearman(pairs: &[(f64, f64)]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let u = evcop_core::estimation::pseudo_observations_column(&x);
    let v = evcop_core::estimation::pseudo_observations_column(&y);
    let n = u.len() as f64;
    let mu = 0.5;
    let cov: f64 = u.iter().zip(&v).map(|(a, b)| (a - mu) * (b - mu)).sum::<f64>() / n;
    let var: f64 = u.iter().map(|a| (a - mu).powi(2)).sum::<f64>() / n;
    cov / var
}

#[test]
fn samplers_are_deterministic_per_stream() {
    let seed = RngSeed::with_stream(42, 3);
    let bases = [
        BaseCopula::gaussian(0.3).unwrap(),
        BaseCopula::student_t(4.0, -0.2).unwrap(),
        BaseCopula::Archimedean { generator: ArchimedeanGenerator::clayton(1.5).unwrap() },
        BaseCopula::ev(FamilyParams::TEv { nu: 2.0, rho: 0.1 }).unwrap(),
    ];
    for b in &bases {
        let x = sample_base(b, 300, seed).unwrap();
        let y = sample_base(b, 300, seed).unwrap();
        assert!(x.iter().zip(&y).all(|(p, q)| p.0.to_bits() == q.0.to_bits() && p.1.to_bits() == q.1.to_bits()));
        assert_ne!(x, sample_base(b, 300, seed.substream(4)).unwrap());
        assert!(x.iter().all(|&(u, v)| u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0));
    }
}

#[test]
fn gaussian_spearman_matches_the_arcsine_identity() {
    let pairs = sample_base(&BaseCopula::gaussian(0.5).unwrap(), 100_000, RngSeed::new(1)).unwrap();
    let want = 6.0 / std::f64::consts::PI * (0.25f64).asin();
    // sd of the sample Spearman rho is roughly (1 - rho^2) / sqrt(n)
    assert!((spearman(&pairs) - want).abs() < 3.0 / (100_000f64).sqrt(), "{}", spearman(&pairs));
    let indep = sample_base(&BaseCopula::gaussian(0.0).unwrap(), 20_000, RngSeed::new(2)).unwrap();
    let (x, y): (Vec<f64>, Vec<f64>) = indep.into_iter().unzip();
    // sd of tau under independence: sqrt(2(2n+5) / (9n(n-1)))
    let n = 20_000f64;
    let sd = (2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0))).sqrt();
    assert!(kendall_tau_sample(&x, &y).abs() < 3.0 * sd);
}

#[test]
fn gumbel_archimedean_and_logistic_ev_have_the_same_tau() {
    let g = BaseCopula::Archimedean { generator: ArchimedeanGenerator::gumbel(2.0).unwrap() };
    let e = BaseCopula::ev(FamilyParams::Logistic { theta: 2.0 }).unwrap();
    for (k, b) in [g, e].iter().enumerate() {
        let (x, y): (Vec<f64>, Vec<f64>) = sample_base(b, 30_000, RngSeed::new(6).substream(k as u64))
            .unwrap()
            .into_iter()
            .unzip();
        assert!((kendall_tau_sample(&x, &y) - 0.5).abs() < 0.012);
    }
}

#[test]
fn t_copula_tau_is_the_elliptical_value() {
    let rho: f64 = 0.6;
    let (x, y): (Vec<f64>, Vec<f64>) = sample_base(&BaseCopula::student_t(3.0, rho).unwrap(), 30_000, RngSeed::new(9))
        .unwrap()
        .into_iter()
        .unzip();
    let want = 2.0 / std::f64::consts::PI * rho.asin();
    assert!((kendall_tau_sample(&x, &y) - want).abs() < 0.012);
}

#[test]
fn block_maxima_of_max_stable_bases_keep_their_copula() {
    let target = EvCopula::family(FamilyParams::Logistic { theta: 2.0 }, 2).unwrap();
    let base = BaseCopula::Archimedean { generator: ArchimedeanGenerator::gumbel(2.0).unwrap() };
    let cfg = BlockMaximaConfig::new(20, 4000, RngSeed::new(31)).unwrap();
    let maxima = block_maxima(&base, &cfg).unwrap();
    assert_eq!(maxima.len(), 4000);
    assert!(empirical_copula_distance(&maxima, &target).unwrap() < 0.01);

    let como = BaseCopula::ev(FamilyParams::Logistic { theta: f64::INFINITY }).unwrap();
    let m = block_maxima(&como, &BlockMaximaConfig::new(7, 50, RngSeed::new(1)).unwrap()).unwrap();
    assert!(m.iter().all(|p| p.0 == p.1));

    let pairs = sample_base(&base, 30, RngSeed::new(2)).unwrap();
    let same = block_maxima_of(&pairs, 1);
    assert!(same.iter().zip(&pairs).all(|(a, b)| (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15));
}

#[test]
fn doa_gaps_decrease() {
    let gumbel = BaseCopula::Archimedean { generator: ArchimedeanGenerator::gumbel(2.0).unwrap() };
    let logistic = EvCopula::family(FamilyParams::Logistic { theta: 2.0 }, 2).unwrap();
    let indep = EvCopula::independence(2).unwrap();
    let gauss = BaseCopula::gaussian(0.5).unwrap();
    let ns = [10u64, 100, 1000, 10_000];
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for n in ns {
        assert!(doa_gap(&gumbel, &logistic, n, 21).unwrap() <= 1e-10);
        let g = doa_gap(&gauss, &indep, n, 21).unwrap();
        let h = doa_gap_husler_reiss(1.0, n, 21).unwrap();
        assert!(g < prev.0 && h < prev.1, "n {n}: {g} {h}");
        prev = (g, h);
    }
    let t = BaseCopula::student_t(3.0, 0.5).unwrap();
    assert!(doa_gap(&t, &indep, 10, 21).is_err());
}

#[test]
fn empirical_distance_separates_models() {
    let logistic = EvCopula::family(FamilyParams::Logistic { theta: 3.0 }, 2).unwrap();
    let own = sample_ev(&logistic, 10_000, RngSeed::new(12)).unwrap();
    assert!(empirical_copula_distance(&own, &logistic).unwrap() <= 0.002);
    let como: Vec<(f64, f64)> = (1..=500).map(|i| (i as f64 / 501.0, i as f64 / 501.0)).collect();
    let indep = EvCopula::independence(2).unwrap();
    assert!(empirical_copula_distance(&como, &indep).unwrap() > 0.01);
}
