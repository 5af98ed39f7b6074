use qiopa_core::channel::{lossy_density_from_pure_single, LossChannel};
use qiopa_core::fock::{
    build_single_mode_macrostate, tensor_product, CutoffSpec, DensityMatrix, GainParams,
};
use qiopa_core::metrology::{
    css_bures_analytic, macroqubit_bures, macroqubit_mean_photons, ofilter_success_probability,
    MacroBasis, OFilterConfig,
};

fn product_state(gain: GainParams, ch: LossChannel) -> DensityMatrix {
    let seeded =
        build_single_mode_macrostate(gain, 1, CutoffSpec::Auto { deficit: 1e-10 }).unwrap();
    let spontaneous =
        build_single_mode_macrostate(gain, 0, CutoffSpec::Fixed(seeded.dim() - 1)).unwrap();
    let rho1 = lossy_density_from_pure_single(&seeded, ch, None).unwrap();
    let rho0 = lossy_density_from_pure_single(&spontaneous, ch, None).unwrap();
    tensor_product(&rho1, &rho0).unwrap()
}

#[test]
fn probe() {
    let gain = GainParams::new(0.8).unwrap();
    let mean = macroqubit_mean_photons(gain);
    println!("mean = {mean:.9}");
    let alpha = mean.sqrt();
    for x in [0.5, 1.0, 2.0] {
        let ch = LossChannel::new(x / mean).unwrap();
        let de = macroqubit_bures(gain, ch, MacroBasis::Equatorial, None).unwrap();
        let dh = macroqubit_bures(gain, ch, MacroBasis::Hv, None).unwrap();
        let dc = css_bures_analytic(alpha, std::f64::consts::FRAC_PI_2, ch).superpositions;
        println!(
            "x={x}: eq={:.15} hv={:.15} css={:.15} (def {:.2e} {:.2e})",
            de.d, dh.d, dc, de.truncation_deficit, dh.truncation_deficit
        );
    }
    for x in [0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
        let ch = LossChannel::new(x / mean).unwrap();
        let du = macroqubit_bures(gain, ch, MacroBasis::Equatorial, None)
            .unwrap()
            .d;
        print!("x={x}: unfilt={du:.9}");
        for k in [2usize, 4, 6] {
            let df = macroqubit_bures(gain, ch, MacroBasis::Equatorial, Some(OFilterConfig { k }))
                .unwrap()
                .d;
            print!(" k{k}={df:.9} gain={:+.3e}", df - du);
        }
        println!();
    }
    for t in [0.3, 0.6, 0.9] {
        let ch = LossChannel::new(1.0 - t).unwrap();
        let rho = product_state(gain, ch);
        print!("T={t}: P(k)=");
        for k in 0..=8usize {
            let p = ofilter_success_probability(&rho, OFilterConfig { k }).unwrap();
            print!(" {p:.6e}");
        }
        println!();
    }
}
