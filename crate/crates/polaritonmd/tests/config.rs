use polaritonmd::config::{self, RunConfig, SignalConfig, BUNDLED};
use polaritonmd::Error;
use proptest::prelude::*;

#[test]
fn bundled_recipes_round_trip() {
    for (name, _) in BUNDLED {
        let loaded = config::load(name).unwrap();
        let text = loaded.config.to_toml();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, loaded.config, "{name}");
        assert_eq!(back.hash(), loaded.hash());
        assert_eq!(loaded.label, *name);
    }
}

#[test]
fn bundled_recipes_share_protocol() {
    for name in ["fig1_lambda000", "fig1_lambda002", "fig1_lambda005", "fig1_lambda010"] {
        let c = config::load(name).unwrap().config;
        assert_eq!(c.initialization.kick_angstrom, [0.01; 3]);
        assert_eq!(c.cavity[0].omega_cm1, 2430.0);
        assert_eq!(c.cavity[0].polarization, [1.0, 0.0, 0.0]);
        assert_eq!(c.integration.t_end_ps, 5.0);
    }
    let lambdas: Vec<f64> = ["fig1_lambda002", "fig1_lambda005", "fig1_lambda010"]
        .iter()
        .map(|n| config::load(n).unwrap().config.cavity[0].lambda_au)
        .collect();
    assert_eq!(lambdas, [0.02, 0.05, 0.1]);
    let fig3 = config::load("fig3_spinning").unwrap().config;
    assert_eq!(fig3.initialization.temperature_k, 100.0);
    assert!(!fig3.initialization.remove_com);
}

#[test]
fn hash_ignores_formatting_but_not_values() {
    let a = RunConfig::parse("[system]\npreset = \"co2\"\n").unwrap();
    let b = RunConfig::parse("# comment\n[system]\npreset   =   \"co2\"\n[integration]\ndt_fs = 0.1\n").unwrap();
    assert_eq!(a.hash(), b.hash());
    let c = RunConfig::parse("[system]\npreset = \"co2\"\n[integration]\ndt_fs = 0.05\n").unwrap();
    assert_ne!(a.hash(), c.hash());
}

#[test]
fn unknown_keys_are_rejected_with_location() {
    let err = RunConfig::parse("[system]\npreset = \"co2\"\n\n[integration]\ndt = 0.1\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("dt"), "{msg}");
    assert!(msg.contains("line 5"), "{msg}");
}

#[test]
fn semantic_errors() {
    let cases = [
        ("[system]\n", "missing"),
        ("[system]\npreset = \"h2o\"\n", "unknown preset"),
        ("[system]\npreset = \"co2\"\n[integration]\nstride = 0\n", "stride"),
        (
            "[system]\npreset = \"co2\"\n[initialization]\nkick_angstrom = [0.01, 0.0, 0.0]\n",
            "kick_species",
        ),
        (
            "[system]\npreset = \"co2\"\n[initialization]\ntemperature_k = -1.0\n",
            "temperature",
        ),
        (
            "[system]\npreset = \"co2\"\n[analysis]\npeak_band_cm1 = [2700.0, 2300.0]\n",
            "peak_band",
        ),
    ];
    for (text, needle) in cases {
        match RunConfig::parse(text) {
            Err(Error::Config(msg)) => assert!(msg.contains(needle), "{needle}: {msg}"),
            other => panic!("{needle}: {other:?}"),
        }
    }
}

#[test]
fn inline_system_matches_preset() {
    let preset = RunConfig::parse("[system]\npreset = \"co2\"\n").unwrap();
    let (m, ff) = preset.build_system().unwrap();
    let mut text = String::from("[system]\n");
    for (label, mass, q) in [("C", 12.011, 0.8), ("O", 15.999, -0.4)] {
        text += &format!("[[system.species]]\nlabel = \"{label}\"\nmass_amu = {mass}\ncharge_e = {q}\n");
    }
    for i in 0..m.len() {
        let r = m.atoms()[i].position;
        text += &format!(
            "[[system.atoms]]\nspecies = \"{}\"\nposition_bohr = [{:?}, {:?}, {:?}]\n",
            m.label(i),
            r.x,
            r.y,
            r.z
        );
    }
    for b in ff.bonds() {
        text += &format!(
            "[[system.bonds]]\ni = {}\nj = {}\nr0_bohr = {:?}\nk_ha_per_bohr2 = {:?}\n",
            b.i, b.j, b.r0, b.k
        );
    }
    for a in ff.angles() {
        text += &format!(
            "[[system.angles]]\ni = {}\nj = {}\nk = {}\ntheta0_deg = {:?}\nk_ha_per_rad2 = {:?}\n",
            a.i,
            a.j,
            a.k,
            a.theta0.to_degrees(),
            a.k_theta
        );
    }
    for c in ff.couplings() {
        text += &format!(
            "[[system.bond_couplings]]\na = {}\nb = {}\nk_ha_per_bohr2 = {:?}\n",
            c.a, c.b, c.k
        );
    }
    let inline = RunConfig::parse(&text).unwrap();
    let (m2, ff2) = inline.build_system().unwrap();
    assert_eq!(m2.positions(), m.positions());
    assert_eq!(m2.charges(), m.charges());
    for (a, b) in m2.masses().iter().zip(m.masses()) {
        assert!((a - b).abs() < 1e-9 * b);
    }
    assert_eq!(ff2.bonds(), ff.bonds());
    assert_eq!(ff2.couplings(), ff.couplings());
    assert!((ff2.angles()[0].theta0 - ff.angles()[0].theta0).abs() < 1e-15);
}

#[test]
fn charge_override_and_charged_system() {
    let cfg = RunConfig::parse("[system]\npreset = \"co2\"\ncharge_overrides_e = { C = 1.0, O = -0.5 }\n").unwrap();
    let (m, _) = cfg.build_system().unwrap();
    assert_eq!(m.charges(), vec![1.0, -0.5, -0.5]);
    let charged = RunConfig::parse("[system]\npreset = \"co2\"\ncharge_overrides_e = { C = 1.0 }\n").unwrap();
    let (m, _) = charged.build_system().unwrap();
    assert!(polaritonmd_core::dipole_moment(&m).is_err());
    let anchored = RunConfig::parse(
        "[system]\npreset = \"co2\"\ncharge_overrides_e = { C = 1.0 }\ndipole_origin_bohr = [0.0, 0.0, 0.0]\n",
    )
    .unwrap();
    let (m, _) = anchored.build_system().unwrap();
    assert!(polaritonmd_core::dipole_moment(&m).is_ok());
}

fn arb_signal() -> impl Strategy<Value = Option<SignalConfig>> {
    prop_oneof![
        Just(None),
        (-1.0..1.0f64, 0.0..4000.0f64, -3.0..3.0f64).prop_map(|(a, f, p)| Some(SignalConfig::Sinusoid {
            amplitude_au: a,
            frequency_cm1: f,
            phase_rad: p
        })),
        (-1.0..1.0f64, 0.0..100.0f64, 0.1..10.0f64).prop_map(|(s, t, w)| Some(SignalConfig::Impulse {
            strength_au: s,
            time_fs: t,
            width_fs: w
        })),
    ]
}

proptest! {
    #[test]
    fn arbitrary_configs_round_trip(
        omega in 100.0..4000.0f64,
        lambda in 0.0..0.2f64,
        kick in prop::array::uniform3(-0.05..0.05f64),
        seed in 0..i64::MAX as u64,
        dt in 0.01..1.0f64,
        stride in 1..100usize,
        drive in arb_signal(),
        remove_com: bool,
    ) {
        let mut cfg = RunConfig::parse("[system]\npreset = \"co2\"\n[[cavity]]\nomega_cm1 = 1.0\nlambda_au = 0.0\npolarization = [0.0, 1.0, 0.0]\n").unwrap();
        cfg.cavity[0].omega_cm1 = omega;
        cfg.cavity[0].lambda_au = lambda;
        cfg.cavity[0].drive = drive;
        cfg.initialization.kick_species = Some("C".into());
        cfg.initialization.kick_angstrom = kick;
        cfg.initialization.seed = seed;
        cfg.initialization.remove_com = remove_com;
        cfg.integration.dt_fs = dt;
        cfg.integration.stride = stride;
        let back = RunConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
