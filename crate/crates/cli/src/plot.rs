//! SVG rendering of a run: occupied cells, the reference path in gray and
//! the driven trajectory colored by speed.

use pursuit_sim::{Scenario, TrajectoryLog};

/// Speed color ramp from 0 to `v_max`, five evenly spaced stops (viridis).
pub const SPEED_RAMP: [[u8; 3]; 5] = [
    [0x44, 0x01, 0x54],
    [0x3b, 0x52, 0x8b],
    [0x21, 0x91, 0x8c],
    [0x5e, 0xc9, 0x62],
    [0xfd, 0xe7, 0x25],
];

const PATH_COLOR: &str = "#9e9e9e";
const OBSTACLE_COLOR: &str = "#37474f";
const EVENT_COLOR: &str = "#c62828";
const TARGET_SIZE: f64 = 800.0;
const PAD: f64 = 20.0;
const LEGEND_HEIGHT: f64 = 40.0;

/// Color for `speed` on the ramp, linearly interpolated between stops.
/// Speeds outside `[0, v_max]` take the end colors.
pub fn speed_color(speed: f64, v_max: f64) -> [u8; 3] {
    let u = if v_max > 0.0 {
        (speed.abs() / v_max).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let pos = u * (SPEED_RAMP.len() - 1) as f64;
    let i = (pos.floor() as usize).min(SPEED_RAMP.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (SPEED_RAMP[i], SPEED_RAMP[i + 1]);
    std::array::from_fn(|k| (a[k] as f64 + f * (b[k] as f64 - a[k] as f64)).round() as u8)
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

struct Frame {
    ox: f64,
    oy: f64,
    height_m: f64,
    scale: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        PAD + (x - self.ox) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        PAD + (self.height_m - (y - self.oy)) * self.scale
    }
}

pub fn render_svg(scenario: &Scenario, log: &TrajectoryLog, v_max: f64) -> String {
    let g = *scenario.grid.geometry();
    let width_m = g.width as f64 * g.resolution;
    let height_m = g.height as f64 * g.resolution;
    let frame = Frame {
        ox: g.origin.x,
        oy: g.origin.y,
        height_m,
        scale: TARGET_SIZE / width_m.max(height_m),
    };
    let w = width_m * frame.scale + 2.0 * PAD;
    let h = height_m * frame.scale + 2.0 * PAD + LEGEND_HEIGHT;
    let mut s = String::new();
    let mut out = |line: String| {
        s.push_str(&line);
        s.push('\n');
    };
    out(format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.3} {h:.3}">"#
    ));
    out(format!(r#"<title>{}</title>"#, escape(&scenario.name)));
    out(format!(r#"<rect width="{w:.3}" height="{h:.3}" fill="white"/>"#));
    out(format!(
        r#"<rect x="{PAD}" y="{PAD}" width="{:.3}" height="{:.3}" fill="none" stroke="{OBSTACLE_COLOR}" stroke-width="1"/>"#,
        width_m * frame.scale,
        height_m * frame.scale
    ));

    // Occupied cells, merged into horizontal runs.
    let cell = g.resolution * frame.scale;
    out(format!(r#"<g fill="{OBSTACLE_COLOR}">"#));
    for row in 0..g.height {
        let mut col = 0;
        while col < g.width {
            if !scenario.grid.is_occupied(col, row) {
                col += 1;
                continue;
            }
            let start = col;
            while col < g.width && scenario.grid.is_occupied(col, row) {
                col += 1;
            }
            let x = frame.x(g.origin.x + start as f64 * g.resolution);
            let y = frame.y(g.origin.y + (row + 1) as f64 * g.resolution);
            out(format!(
                r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{cell:.3}"/>"#,
                (col - start) as f64 * cell
            ));
        }
    }
    out("</g>".into());

    for event in &scenario.events {
        let (a, b) = event.rect_points();
        out(format!(
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="{EVENT_COLOR}" stroke-width="2" stroke-dasharray="6 4"/>"#,
            frame.x(a.x.min(b.x)),
            frame.y(a.y.max(b.y)),
            (a.x - b.x).abs() * frame.scale,
            (a.y - b.y).abs() * frame.scale
        ));
    }

    let path: Vec<String> = scenario
        .path
        .points()
        .iter()
        .map(|p| format!("{:.3},{:.3}", frame.x(p.x), frame.y(p.y)))
        .collect();
    out(format!(
        r#"<polyline points="{}" fill="none" stroke="{PATH_COLOR}" stroke-width="4" stroke-linejoin="round"/>"#,
        path.join(" ")
    ));

    // Trajectory: consecutive segments of equal color share one polyline.
    let records = &log.records;
    let mut i = 0;
    while i + 1 < records.len() {
        let color = speed_color(records[i + 1].v, v_max);
        let mut points = vec![records[i].pose];
        while i + 1 < records.len() && speed_color(records[i + 1].v, v_max) == color {
            points.push(records[i + 1].pose);
            i += 1;
        }
        let pts: Vec<String> = points
            .iter()
            .map(|p| format!("{:.3},{:.3}", frame.x(p.x), frame.y(p.y)))
            .collect();
        out(format!(
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2" stroke-linecap="round"/>"#,
            pts.join(" "),
            hex(color)
        ));
    }

    // Legend: the ramp over [0, v_max].
    let ly = height_m * frame.scale + 2.0 * PAD;
    let lw = (w - 2.0 * PAD).min(300.0);
    out(r#"<defs><linearGradient id="speed">"#.into());
    for (k, c) in SPEED_RAMP.iter().enumerate() {
        out(format!(
            r#"<stop offset="{}" stop-color="{}"/>"#,
            k as f64 / (SPEED_RAMP.len() - 1) as f64,
            hex(*c)
        ));
    }
    out("</linearGradient></defs>".into());
    out(format!(
        r#"<rect x="{PAD}" y="{ly:.3}" width="{lw:.3}" height="10" fill="url(#speed)"/>"#
    ));
    out(format!(
        r#"<text x="{PAD}" y="{:.3}" font-family="sans-serif" font-size="12">0</text>"#,
        ly + 25.0
    ));
    out(format!(
        r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12" text-anchor="end">{v_max} m/s</text>"#,
        PAD + lw,
        ly + 25.0
    ));
    out("</svg>".into());
    s
}

fn escape(text: &str) -> String {
    let mut s = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => s.push_str("&amp;"),
            '<' => s.push_str("&lt;"),
            '>' => s.push_str("&gt;"),
            '"' => s.push_str("&quot;"),
            _ => s.push(c),
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use pursuit_core::{ControllerConfig, Variant};
    use pursuit_sim::{generate_scenario, resolve_configs, run_scenario, ScenarioKind, SimConfig};

    #[test]
    fn ramp_hits_stops_and_clamps() {
        assert_eq!(speed_color(0.0, 0.8), SPEED_RAMP[0]);
        assert_eq!(speed_color(0.4, 0.8), SPEED_RAMP[2]);
        assert_eq!(speed_color(0.8, 0.8), SPEED_RAMP[4]);
        assert_eq!(speed_color(2.0, 0.8), SPEED_RAMP[4]);
        assert_eq!(speed_color(-0.8, 0.8), SPEED_RAMP[4]);
        assert_eq!(speed_color(0.5, 0.0), SPEED_RAMP[0]);
    }

    #[test]
    fn ramp_interpolates_between_stops() {
        // Halfway between the first two stops.
        let c = speed_color(0.1, 0.8);
        for k in 0..3 {
            let mid = (SPEED_RAMP[0][k] as f64 + SPEED_RAMP[1][k] as f64) / 2.0;
            assert!((c[k] as f64 - mid).abs() <= 0.5);
        }
    }

    #[test]
    fn svg_has_path_trajectory_and_obstacles() {
        let scenario = generate_scenario(ScenarioKind::Slalom, &toml::Table::new()).unwrap();
        let base = ControllerConfig::default().with_variant(Variant::Rpp);
        let (cfg, sim) = resolve_configs(&scenario, &base, &SimConfig::default()).unwrap();
        let result = run_scenario(&scenario, &cfg, &sim).unwrap();
        let svg = render_svg(&scenario, &result.log, cfg.v_max);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(&format!(r#"stroke="{PATH_COLOR}""#)));
        assert!(svg.contains(&format!(r#"<g fill="{OBSTACLE_COLOR}">"#)));
        assert!(svg.matches("<polyline").count() > 2);
        assert_eq!(svg, render_svg(&scenario, &result.log, cfg.v_max));
    }

    #[test]
    fn escape_markup() {
        assert_eq!(escape(r#"a<b>&"c""#), "a&lt;b&gt;&amp;&quot;c&quot;");
    }
}
