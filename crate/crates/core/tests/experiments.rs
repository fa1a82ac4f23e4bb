use d4count::experiments::{bound_suite, growth_table, Bound, Grid, GrowthRow, Method};
use d4count::{Error, Limits};

#[test]
fn torsor_growth_fixture() {
    let l = Limits::default();
    let rows = growth_table(&[10, 100, 1000], Method::Torsor, &l).unwrap();
    let counts: Vec<Option<u64>> = rows.iter().map(|r| r.n_torsor).collect();
    assert_eq!(counts, [Some(127), Some(5209), Some(135403)]);
    assert!(rows.iter().all(|r| r.n_direct.is_none()));
    let both = growth_table(&[10, 100], Method::Both, &l).unwrap();
    assert_eq!(
        both[1],
        GrowthRow {
            b: 100,
            n_direct: Some(5209),
            n_torsor: Some(5209),
            ratio6: both[1].ratio6
        }
    );
}

#[test]
fn growth_respects_method_limits() {
    let l = Limits {
        torsor_limit: 50,
        ..Limits::default()
    };
    assert!(matches!(
        growth_table(&[10, 60], Method::Both, &l),
        Err(Error::LimitExceeded { .. })
    ));
    assert!(growth_table(&[10, 60], Method::Direct, &l).is_ok());
}

#[test]
fn suite_reports_follow_the_bound_order() {
    let reports = bound_suite(Grid::Small, &Limits::default()).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r.name.as_str()).collect();
    let want: Vec<&str> = Bound::ALL.iter().map(|b| b.name()).collect();
    assert_eq!(names, want);
    for r in &reports {
        assert!(r.instances > 0, "{}", r.name);
        let j = r.fuzz_json();
        assert_eq!(j["lemma"], r.name.as_str());
        assert_eq!(j["n_instances"], r.instances);
        assert!(j.get("witness_instance").is_some());
    }
    let hard_clean = ["line", "rho", "conic"];
    for r in reports.iter().filter(|r| hard_clean.contains(&r.name.as_str())) {
        assert_eq!(r.violations, 0, "{}", r.name);
    }
}

#[test]
fn suite_json_is_reproducible() {
    let l = Limits::default();
    let a = serde_json::to_string(&bound_suite(Grid::Small, &l).unwrap()).unwrap();
    let b = serde_json::to_string(&bound_suite(Grid::Small, &l).unwrap()).unwrap();
    assert_eq!(a, b);
}
