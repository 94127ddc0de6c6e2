//! Acceptance suite. Each criterion prints one PASS/FAIL line with the
//! measured values; the process exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p pursuit-sim --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use pursuit_core::{
    angular_velocity, check_collision, combine_regulation, compute_curvature, compute_distance_field,
    curvature_heuristic, goal_approach_scaling, project_arc, proximity_heuristic, rotate_in_place, unicycle_motion,
    Controller, ControllerConfig, GridGeometry, OccupancyGrid, Path, PathPoint, Pose2D, Variant,
};
use pursuit_sim::{generate_scenario, resolve_configs, run_scenario, MetricsReport, Scenario, ScenarioKind, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 step-path ordering", step_path_ordering),
        ("2 r_min sweep", r_min_sweep),
        ("3 blind corner", blind_corner),
        ("4 slalom", slalom),
        ("5 heuristic oracles", heuristic_oracles),
        ("6 collision machinery", collision_machinery),
        ("7 variant reduction", variant_reduction),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        println!(
            "criterion {name}: {} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}

fn params(pairs: &[(&str, f64)]) -> toml::Table {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), toml::Value::Float(*v)))
        .collect()
}

fn run(scenario: &Scenario, variant: Variant) -> MetricsReport {
    let base = ControllerConfig::default().with_variant(variant);
    let (cfg, sim) = resolve_configs(scenario, &base, &SimConfig::default()).expect("scenario overrides");
    run_scenario(scenario, &cfg, &sim).expect("run").metrics
}

fn step_path_ordering() -> Verdict {
    let scenario = generate_scenario(ScenarioKind::StepPath, &params(&[("v_desired", 1.0), ("r_min", 1.5)])).unwrap();
    let mut errors = [0.0; 3];
    let mut slowest = 0.0_f64;
    for (i, variant) in Variant::ALL.into_iter().enumerate() {
        let start = Instant::now();
        errors[i] = run(&scenario, variant).average_distance_to_path;
        slowest = slowest.max(start.elapsed().as_secs_f64());
    }
    let [pp, app, rpp] = errors;
    let pass = rpp < app && app < pp && rpp <= 0.5 * app && slowest < 10.0;
    verdict(
        pass,
        format!(
            "PP {pp:.4} APP {app:.4} RPP {rpp:.4}, RPP/APP {:.3} (need <= 0.5), slowest run {slowest:.2} s",
            rpp / app
        ),
    )
}

fn r_min_sweep() -> Verdict {
    let radii = [1.0, 1.25, 1.5, 1.75, 2.0];
    let results: Vec<MetricsReport> = radii
        .iter()
        .map(|&r| {
            let scenario = generate_scenario(ScenarioKind::StepPath, &params(&[("r_min", r)])).unwrap();
            run(&scenario, Variant::Rpp)
        })
        .collect();
    let e: Vec<f64> = results.iter().map(|m| m.average_distance_to_path).collect();
    let t: Vec<f64> = results.iter().map(|m| m.time).collect();
    let decreasing = e[0] > e[1] && e[1] > e[2];
    let slower = t[0] <= t[1] && t[1] <= t[2];
    let first_gain = e[0] - e[1];
    let later: Vec<f64> = (2..4).map(|i| (e[i] - e[i + 1]) / first_gain).collect();
    let plateau = first_gain > 0.0 && later.iter().all(|g| *g < 0.2);
    verdict(
        decreasing && slower && plateau,
        format!(
            "errors {:?}, times {:?}, later gains relative to 1.0->1.25: {:?} (need < 0.2)",
            e.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>(),
            t,
            later.iter().map(|x| (x * 1e3).round() / 1e3).collect::<Vec<_>>()
        ),
    )
}

/// Ten blind-corner runs per variant, each starting a random fraction of a
/// control period's travel behind the nominal start so the trigger crossing
/// falls at a different phase of the control cycle.
fn blind_corner() -> Verdict {
    let scenario = generate_scenario(ScenarioKind::BlindCorner, &toml::Table::new()).unwrap();
    let sim = SimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2021);
    let shifts: Vec<f64> = (0..10)
        .map(|_| rng.random_range(0.0..ControllerConfig::<f64>::default().v_max * sim.dt))
        .collect();
    let mut stopped = [0.0; 3];
    let mut collisions_checked = 0;
    let mut unchecked_hits = [0; 3];
    let mut all_stopped = true;
    for (i, variant) in Variant::ALL.into_iter().enumerate() {
        let base = ControllerConfig::default().with_variant(variant);
        let (cfg, sim) = resolve_configs(&scenario, &base, &sim).unwrap();
        for &shift in &shifts {
            let mut s = scenario.clone();
            let th = s.start.theta();
            s.start = Pose2D::new(s.start.x - shift * th.cos(), s.start.y - shift * th.sin(), th);
            let m = run_scenario(&s, &cfg, &sim).unwrap().metrics;
            collisions_checked += m.collisions;
            match m.stopped_distance_to_obstacle {
                Some(d) => stopped[i] += d / shifts.len() as f64,
                None => all_stopped = false,
            }
            let mut blind = cfg.clone();
            blind.use_collision_checking = false;
            if run_scenario(&s, &blind, &sim).unwrap().metrics.collisions > 0 {
                unchecked_hits[i] += 1;
            }
        }
    }
    let [pp, app, rpp] = stopped;
    let pass = collisions_checked == 0
        && all_stopped
        && rpp >= 1.2 * app
        && rpp >= 1.2 * pp
        && unchecked_hits[0] >= 8
        && unchecked_hits[1] >= 8;
    verdict(
        pass,
        format!(
            "mean stopped distance PP {pp:.3} APP {app:.3} RPP {rpp:.3} (RPP/max {:.2}, need >= 1.2), \
             collisions with checking {collisions_checked}, all runs stopped {all_stopped}, \
             collisions without checking PP {}/10 APP {}/10 RPP {}/10",
            rpp / pp.max(app),
            unchecked_hits[0],
            unchecked_hits[1],
            unchecked_hits[2]
        ),
    )
}

fn slalom() -> Verdict {
    let scenario = generate_scenario(ScenarioKind::Slalom, &toml::Table::new()).unwrap();
    let [pp, app, rpp] = Variant::ALL.map(|v| run(&scenario, v));
    let collisions = pp.collisions + app.collisions + rpp.collisions;
    let pass = rpp.average_distance_to_path <= app.average_distance_to_path
        && pp.distance_traveled < app.distance_traveled
        && pp.distance_traveled < rpp.distance_traveled
        && collisions == 0
        && [&pp, &app, &rpp].iter().all(|m| m.success);
    verdict(
        pass,
        format!(
            "path error APP {:.4} RPP {:.4}; distance PP {:.3} APP {:.3} RPP {:.3}; collisions {collisions}",
            app.average_distance_to_path,
            rpp.average_distance_to_path,
            pp.distance_traveled,
            app.distance_traveled,
            rpp.distance_traveled
        ),
    )
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * b.abs().max(a.abs())
}

/// Signed curvature of the circle tangent to the x axis at the origin and
/// passing through `p`. That circle is symmetric about the y axis, so it is
/// the circumcircle of the origin, `p` and the mirror image of `p`.
fn circle_fit_curvature(p: (f64, f64)) -> f64 {
    let (x, y) = p;
    if y == 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        // The chord to p is a diameter.
        return 2.0 / y;
    }
    let (cx, cy) = circumcenter((0.0, 0.0), (x, y), (-x, y));
    cy.signum() / cx.hypot(cy)
}

fn circumcenter(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> (f64, f64) {
    let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    let (sa, sb, sc) = (a.0 * a.0 + a.1 * a.1, b.0 * b.0 + b.1 * b.1, c.0 * c.0 + c.1 * c.1);
    (
        (sa * (b.1 - c.1) + sb * (c.1 - a.1) + sc * (a.1 - b.1)) / d,
        (sa * (c.0 - b.0) + sb * (a.0 - c.0) + sc * (b.0 - a.0)) / d,
    )
}

fn heuristic_oracles() -> Verdict {
    let mut bad = Vec::new();
    let mut expect = |name: &str, got: f64, want: f64| {
        if !close(got, want) {
            bad.push(format!("{name}: {got} != {want}"));
        }
    };
    expect("kappa(0,1)", compute_curvature(&PathPoint::new(0.0, 1.0)).unwrap(), 2.0);
    expect(
        "kappa(0.6,0.8)",
        compute_curvature(&PathPoint::new(0.6, 0.8)).unwrap(),
        1.6,
    );
    expect(
        "curvature heuristic active",
        curvature_heuristic(1.0, 2.0, 1.5),
        1.0 / 3.0,
    );
    expect("curvature heuristic inactive", curvature_heuristic(1.0, 0.5, 1.5), 1.0);
    expect("proximity heuristic", proximity_heuristic(1.0, 0.5, 1.0, 1.0), 0.5);
    expect("combine a", combine_regulation(0.33, 0.5), 0.33);
    expect("combine b", combine_regulation(0.8, 0.2), 0.2);
    expect("goal scaling", goal_approach_scaling(0.8, 0.5, 1.0, 0.1), 0.4);
    expect("goal scaling floor", goal_approach_scaling(0.8, 0.01, 1.0, 0.1), 0.1);
    let (v, w) = angular_velocity(0.5, 2.0, 3.2);
    expect("omega v", v, 0.5);
    expect("omega", w, 1.0);
    let (v, w) = angular_velocity(1.0, 4.0, 3.2);
    expect("omega clamp v", v, 0.8);
    expect("omega clamp", w, 3.2);
    expect("rotate pi/2", rotate_in_place(PI / 2.0, 3.2, 2.0).omega, PI);
    expect("rotate -pi", rotate_in_place(-PI, 3.2, 2.0).omega, -3.2);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fit_failures = 0;
    for _ in 0..1000 {
        let p = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let got = compute_curvature(&PathPoint::new(p.0, p.1)).unwrap();
        if !close(got, circle_fit_curvature(p)) {
            fit_failures += 1;
        }
    }
    let pass = bad.is_empty() && fit_failures == 0;
    verdict(
        pass,
        format!(
            "{} hand-computed mismatches {:?}, circle-fit mismatches {fit_failures}/1000",
            bad.len(),
            bad
        ),
    )
}

fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> OccupancyGrid<f64> {
    let mut g = OccupancyGrid::new(GridGeometry::new(w, h, 0.05, PathPoint::new(0.0, 0.0)).unwrap());
    for row in 0..h {
        for col in 0..w {
            if rng.random_bool(density) {
                g.set_occupied(col, row, true);
            }
        }
    }
    g
}

fn brute_force_field(g: &OccupancyGrid<f64>) -> Vec<f64> {
    let occupied: Vec<(i64, i64)> = (0..g.height())
        .flat_map(|r| (0..g.width()).map(move |c| (c, r)))
        .filter(|&(c, r)| g.is_occupied(c, r))
        .map(|(c, r)| (c as i64, r as i64))
        .collect();
    let mut out = Vec::with_capacity(g.width() * g.height());
    for r in 0..g.height() as i64 {
        for c in 0..g.width() as i64 {
            let best = occupied.iter().map(|&(oc, or)| (oc - c).pow(2) + (or - r).pow(2)).min();
            out.push(best.map_or(f64::INFINITY, |d| (d as f64).sqrt() * g.resolution()));
        }
    }
    out
}

fn rk4_position(pose: (f64, f64, f64), v: f64, w: f64, horizon: f64, steps: usize) -> (f64, f64) {
    let f = |s: [f64; 3]| [v * s[2].cos(), v * s[2].sin(), w];
    let h = horizon / steps as f64;
    let mut s = [pose.0, pose.1, pose.2];
    for _ in 0..steps {
        let k1 = f(s);
        let k2 = f(std::array::from_fn(|i| s[i] + h / 2.0 * k1[i]));
        let k3 = f(std::array::from_fn(|i| s[i] + h / 2.0 * k2[i]));
        let k4 = f(std::array::from_fn(|i| s[i] + h * k3[i]));
        s = std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    (s[0], s[1])
}

fn collision_machinery() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(64);

    let mut field_mismatches = 0;
    for _ in 0..100 {
        let (w, h) = (rng.random_range(1..=64), rng.random_range(1..=64));
        let density = rng.random_range(0.0..0.3);
        let g = random_grid(&mut rng, w, h, density);
        let f = compute_distance_field(&g);
        let got: Vec<f64> = (0..h)
            .flat_map(|r| (0..w).map(move |c| (c, r)))
            .map(|(c, r)| f.at_cell(c, r))
            .collect();
        if got != brute_force_field(&g) {
            field_mismatches += 1;
        }
    }

    let mut worst_rk4 = 0.0_f64;
    for _ in 0..200 {
        let pose = (
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-PI..PI),
        );
        let (v, w) = (rng.random_range(-1.5..1.5), rng.random_range(-3.2..3.2));
        let end = unicycle_motion(&Pose2D::new(pose.0, pose.1, pose.2), v, w, 2.0);
        let (x, y) = rk4_position(pose, v, w, 2.0, 20_000);
        worst_rk4 = worst_rk4.max((end.x - x).hypot(end.y - y));
    }

    // A one-cell wall spans the grid at a random column. Every trial whose
    // continuous arc crosses that column must be reported as a collision.
    let mut trials = 0;
    let mut tunnels = 0;
    while trials < 1000 {
        let mut g = OccupancyGrid::new(GridGeometry::new(120, 120, 0.05, PathPoint::new(0.0, 0.0)).unwrap());
        let col = rng.random_range(50..70);
        for row in 0..120 {
            g.set_occupied(col, row, true);
        }
        let wall_x = (col as f64 * 0.05, (col + 1) as f64 * 0.05);
        let start = Pose2D::new(
            rng.random_range(0.5..wall_x.0 - 0.3),
            rng.random_range(2.0..4.0),
            rng.random_range(-1.2..1.2),
        );
        let (v, w) = (rng.random_range(0.2..2.0), rng.random_range(-2.0..2.0));
        let radius = rng.random_range(0.0..0.3);
        let crosses = (0..=20_000).any(|i| {
            let p = unicycle_motion(&start, v, w, 2.0 * i as f64 / 20_000.0);
            p.x >= wall_x.0 && p.x < wall_x.1 && p.y > 0.0 && p.y < 6.0
        });
        if !crosses {
            continue;
        }
        trials += 1;
        let f = compute_distance_field(&g);
        let arc = project_arc(&start, v, w, 2.0, 0.05, radius);
        let check = check_collision(&f, &arc, radius);
        if check.time_to_collision.is_none() || check.left_grid {
            tunnels += 1;
        }
    }

    let pass = field_mismatches == 0 && worst_rk4 < 1e-6 && tunnels == 0;
    verdict(
        pass,
        format!(
            "distance field mismatches {field_mismatches}/100, worst arc vs RK4 {worst_rk4:.2e} m, \
             tunneling {tunnels}/{trials}"
        ),
    )
}

fn random_path(rng: &mut ChaCha8Rng) -> Path<f64> {
    let mut pts = vec![PathPoint::new(2.0, 2.0)];
    let mut heading: f64 = rng.random_range(-PI..PI);
    for _ in 0..rng.random_range(20..120) {
        heading += rng.random_range(-0.3..0.3);
        let last = *pts.last().unwrap();
        pts.push(PathPoint::new(
            last.x + 0.05 * heading.cos(),
            last.y + 0.05 * heading.sin(),
        ));
    }
    Path::new(pts).unwrap()
}

fn variant_reduction() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut rpp_app = 0;
    let mut app_pp = 0;
    let mut statuses = std::collections::BTreeSet::new();
    for _ in 0..100 {
        let path = random_path(&mut rng);
        let mut g = OccupancyGrid::new(GridGeometry::new(160, 160, 0.05, PathPoint::new(-2.0, -2.0)).unwrap());
        g.fill_rect(&PathPoint::new(4.5, -2.0), &PathPoint::new(4.8, -1.0));
        let field = compute_distance_field(&g);
        let anchor = path.points()[rng.random_range(0..path.len() / 2)];
        let pose = Pose2D::new(
            anchor.x + rng.random_range(-0.3..0.3),
            anchor.y + rng.random_range(-0.3..0.3),
            rng.random_range(-PI..PI),
        );
        let speed = rng.random_range(0.0..0.8);

        let mut rpp = ControllerConfig::default().with_variant(Variant::Rpp);
        rpp.r_min = 1e-9;
        rpp.d_prox = 1e-9;
        let app = ControllerConfig {
            variant: Variant::App,
            ..rpp.clone()
        };
        let mut app_fixed = ControllerConfig::default().with_variant(Variant::App);
        app_fixed.lookahead_min = app_fixed.fixed_lookahead;
        app_fixed.lookahead_max = app_fixed.fixed_lookahead;
        let pp = ControllerConfig {
            variant: Variant::Pp,
            ..app_fixed.clone()
        };

        let mut out = |cfg: ControllerConfig<f64>| {
            let mut c = Controller::new(cfg).unwrap();
            c.set_path(path.clone());
            let result = c.compute_command(&pose, speed, &field);
            if let Ok(o) = &result {
                statuses.insert(o.status.as_str());
            }
            format!("{result:?}")
        };
        if out(rpp) != out(app) {
            rpp_app += 1;
        }
        if out(app_fixed) != out(pp) {
            app_pp += 1;
        }
    }
    verdict(
        rpp_app == 0 && app_pp == 0,
        format!("RPP vs APP mismatches {rpp_app}/100, APP vs PP mismatches {app_pp}/100, statuses seen {statuses:?}"),
    )
}

fn determinism() -> Verdict {
    let mut differing = Vec::new();
    for kind in ScenarioKind::ALL {
        let scenario = generate_scenario(kind, &toml::Table::new()).unwrap();
        for variant in Variant::ALL {
            let base = ControllerConfig::default().with_variant(variant);
            let (cfg, sim) = resolve_configs(&scenario, &base, &SimConfig::default()).unwrap();
            let a = run_scenario(&scenario, &cfg, &sim).unwrap().log.to_csv_string();
            let b = run_scenario(&scenario, &cfg, &sim).unwrap().log.to_csv_string();
            if a != b {
                differing.push(format!("{kind}/{variant}"));
            }
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} of 12 runs differ {:?}", differing.len(), differing),
    )
}
