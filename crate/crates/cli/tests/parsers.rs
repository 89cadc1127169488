use mbhe_cli::config::{ConfigFile, DEFAULT_KERNEL_GRID, MAX_N};
use mbhe_cli::{
    parse_grid, parse_ns, parse_potential, Command, ConfigError, Format, Grid, RunConfig,
};
use proptest::prelude::*;

#[test]
fn grid_examples() {
    let g = parse_grid("0.5:3:9").unwrap();
    assert_eq!(
        g,
        Grid {
            x_min: 0.5,
            x_max: 3.0,
            points: 9
        }
    );
    let v = g.values();
    assert_eq!(v.len(), 9);
    assert_eq!((v[0], v[8]), (0.5, 3.0));
    assert!((v[1] - 0.8125).abs() < 1e-15);
    assert_eq!(parse_grid(" 1 : 1 : 1 ").unwrap().values(), vec![1.0]);
    assert_eq!(DEFAULT_KERNEL_GRID.pairs().len(), 9);
    assert_eq!(DEFAULT_KERNEL_GRID.pairs()[1], (0.5, 1.75));
}

#[test]
fn grid_rejections() {
    for bad in [
        "", "0.5:3", "0:3:9", "-1:3:9", "3:1:4", "1:2:0", "1:1:3", "1:inf:3", "nan:2:3", "1:2:3:4",
        "a:b:c", "1:2:-3",
    ] {
        assert!(
            matches!(parse_grid(bad), Err(ConfigError::Grid { .. })),
            "{bad}"
        );
    }
}

#[test]
fn ns_examples() {
    assert_eq!(parse_ns("8,16,32,64").unwrap(), vec![8, 16, 32, 64]);
    assert_eq!(parse_ns(" 5 ").unwrap(), vec![5]);
    for bad in [
        "",
        "8,8",
        "16,8",
        "0,1",
        "1,,2",
        "x",
        "-1",
        &format!("{}", MAX_N + 1),
    ] {
        assert!(
            matches!(parse_ns(bad), Err(ConfigError::NList { .. })),
            "{bad}"
        );
    }
}

#[test]
fn potential_forms() {
    assert_eq!(parse_potential("x").unwrap(), vec![1.0]);
    assert_eq!(parse_potential("x + x^2/2").unwrap(), vec![1.0, 0.5]);
    assert_eq!(parse_potential("X^2").unwrap(), vec![0.0, 1.0]);
    assert_eq!(parse_potential("1, 0.5").unwrap(), vec![1.0, 0.5]);
    assert_eq!(parse_potential("0,1").unwrap(), vec![0.0, 1.0]);
    for bad in ["", "-x", "1,-1", "0", "x^", "1,a", "nan"] {
        assert!(parse_potential(bad).is_err(), "{bad}");
    }
}

#[test]
fn config_file_and_precedence() {
    let file = ConfigFile::from_json(
        r#"{"command": "converge", "potential": [1.0, 0.5], "theta": 2, "alpha": 0.5,
            "n_list": [8, 16], "grid": {"x_min": 0.5, "x_max": 3.0, "points": 3},
            "precision_bits": 512, "format": "json", "seed": 3}"#,
    )
    .unwrap();
    let flags = ConfigFile {
        theta: Some(1.0),
        seed: Some(9),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(file.clone().overridden_by(flags), None).unwrap();
    assert_eq!(cfg.command, Command::Converge);
    assert_eq!((cfg.theta, cfg.alpha, cfg.seed), (1.0, 0.5, 9));
    assert_eq!(cfg.potential, vec![1.0, 0.5]);
    assert_eq!(cfg.format, Format::Json);
    assert_eq!(cfg.precision_bits, Some(512));
    // the environment wins over file and flags
    let flags = ConfigFile {
        precision_bits: Some(300),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(file.overridden_by(flags), Some("1024")).unwrap();
    assert_eq!(cfg.precision_bits, Some(1024));
}

#[test]
fn defaults_depend_on_the_command() {
    let only = |c| ConfigFile {
        command: Some(c),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(only(Command::Converge), None).unwrap();
    assert_eq!(cfg.format, Format::Csv);
    assert_eq!(cfg.n_list, vec![8, 16, 32, 64]);
    assert_eq!(cfg.kernel_grid(), DEFAULT_KERNEL_GRID);
    let cfg = RunConfig::resolve(only(Command::FiniteN), None).unwrap();
    assert_eq!(cfg.n_list, vec![32]);
    let cfg = RunConfig::resolve(only(Command::CheckIdentities), None).unwrap();
    assert_eq!(cfg.format, Format::Json);
}

#[test]
fn config_rejections() {
    assert!(matches!(
        ConfigFile::from_json(r#"{"thta": 1}"#),
        Err(ConfigError::File(_))
    ));
    assert!(matches!(
        ConfigFile::from_json(r#"{"command": "plot"}"#),
        Err(ConfigError::File(_))
    ));
    assert!(ConfigFile::from_json("[").is_err());
    let base = |f: ConfigFile| {
        RunConfig::resolve(
            ConfigFile {
                command: Some(Command::Converge),
                ..f
            },
            None,
        )
    };
    assert!(RunConfig::resolve(ConfigFile::default(), None).is_err());
    assert!(base(ConfigFile {
        theta: Some(1.5),
        ..Default::default()
    })
    .is_err());
    assert!(base(ConfigFile {
        theta: Some(0.5),
        ..Default::default()
    })
    .is_err());
    assert!(base(ConfigFile {
        alpha: Some(-1.0),
        ..Default::default()
    })
    .is_err());
    assert!(base(ConfigFile {
        n_list: Some(vec![16, 8]),
        ..Default::default()
    })
    .is_err());
    assert!(base(ConfigFile {
        potential: Some(vec![-1.0]),
        ..Default::default()
    })
    .is_err());
    assert!(base(ConfigFile {
        precision_bits: Some(16),
        ..Default::default()
    })
    .is_err());
    let grid = Grid {
        x_min: -1.0,
        x_max: 1.0,
        points: 3,
    };
    assert!(base(ConfigFile {
        grid: Some(grid),
        ..Default::default()
    })
    .is_err());
    assert!(RunConfig::resolve(
        ConfigFile {
            command: Some(Command::Converge),
            ..Default::default()
        },
        Some("lots")
    )
    .is_err());
    let fin = ConfigFile {
        command: Some(Command::FiniteN),
        n_list: Some(vec![8, 16]),
        ..Default::default()
    };
    assert!(RunConfig::resolve(fin, None).is_err());
    // non-integer θ is allowed for the equilibrium problem only
    let eq = ConfigFile {
        command: Some(Command::Equilibrium),
        theta: Some(1.5),
        ..Default::default()
    };
    assert!(RunConfig::resolve(eq, None).is_ok());
}

#[test]
fn number_formatting() {
    assert_eq!(mbhe_cli::fmt_num(1.0), "1.00000000000000e0");
    assert_eq!(mbhe_cli::fmt_num(-0.1), "-1.00000000000000e-1");
    assert_eq!(mbhe_cli::round15(0.1 + 0.2), 0.3);
    assert_eq!(mbhe_cli::fmt_num(f64::NAN), "NaN");
}

proptest! {
    #[test]
    fn grid_round_trip(lo in 1e-3f64..10.0, w in 1e-3f64..10.0, n in 2usize..200) {
        let text = format!("{lo}:{}:{n}", lo + w);
        let g = parse_grid(&text).unwrap();
        let v = g.values();
        prop_assert_eq!(v.len(), n);
        prop_assert!(v.windows(2).all(|p| p[1] > p[0]));
        prop_assert_eq!(v[n - 1], lo + w);
    }

    #[test]
    fn ns_accepted_iff_strictly_ascending(ns in proptest::collection::vec(1usize..=MAX_N, 1..10)) {
        let text = ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        let ascending = ns.windows(2).all(|w| w[0] < w[1]);
        prop_assert_eq!(parse_ns(&text).ok(), ascending.then(|| ns.clone()));
    }

    #[test]
    fn parsers_never_panic(s in "\\PC{0,24}") {
        let _ = parse_grid(&s);
        let _ = parse_ns(&s);
        let _ = parse_potential(&s);
        let _ = ConfigFile::from_json(&s);
    }

    #[test]
    fn round15_is_idempotent(x in proptest::num::f64::NORMAL) {
        let r = mbhe_cli::round15(x);
        prop_assert_eq!(mbhe_cli::round15(r), r);
        prop_assert!(((r - x) / x).abs() < 1e-14);
    }
}
