use forge::atom::{breit_rabi_levels, HyperfineModel, TransitionSpec};

fn main() {
    let lv = breit_rabi_levels(&HyperfineModel::be9_z(22.3e-3));
    for (l, e) in lv.labels.iter().zip(&lv.energies_hz) {
        println!("|{}, {:>2}>  {:>14.3} MHz", l.f, l.m_f, e * 1e-6);
    }
    let q = TransitionSpec::qubit();
    let f = |b: f64| breit_rabi_levels(&HyperfineModel::be9_z(b)).frequency(&q);
    // field sensitivity of the qubit near the turning point
    for b in [21.3e-3, 22.3e-3, 23.3e-3] {
        println!(
            "B0 {:.1} mT: qubit {:.4} MHz, df/dB {:8.1} Hz/mT",
            b * 1e3,
            f(b) * 1e-6,
            (f(b + 1e-6) - f(b - 1e-6)) / 2e-3
        );
    }
}
