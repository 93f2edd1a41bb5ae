//! SVG 1.1 Gantt chart of one round: a lane per client, one bar per phase.

use std::fmt::Write;

use crate::scheduler::{Phase, RoundSchedule};

const WIDTH: f64 = 960.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const LANE: f64 = 28.0;
const BAR: f64 = 18.0;
const AXIS: f64 = 40.0;
const FONT: &str = "DejaVu Sans, Arial, sans-serif";

const STYLE: &str = "\
.distribute{fill:#4c78a8}\
.train{fill:#bab0ac}\
.upload{fill:#f58518}\
.lane{stroke:#e0e0e0;stroke-width:1}\
.axis{stroke:#333333;stroke-width:1}\
.makespan{stroke:#d62728;stroke-width:1.5;stroke-dasharray:4 3}\
text{font-size:11px}";

/// Fixed three-decimal formatting so output does not depend on float printing.
fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Tick spacing of 1, 2 or 5 times a power of ten giving at most ~10 ticks.
fn tick_step(span: f64) -> f64 {
    if span <= 0.0 {
        return 1.0;
    }
    let raw = span / 10.0;
    let pow = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * pow).find(|s| *s >= raw).unwrap_or(10.0 * pow)
}

/// Renders `schedule` with time measured from the round start.
pub fn render_svg(schedule: &RoundSchedule) -> String {
    let mut clients: Vec<_> = schedule.intervals.iter().map(|i| i.client_id).collect();
    clients.sort_unstable();
    clients.dedup();

    let t0 = schedule.round_start_s;
    let span = schedule
        .intervals
        .iter()
        .map(|i| i.end_s - t0)
        .fold(schedule.makespan_s, f64::max)
        .max(f64::MIN_POSITIVE);
    let plot = WIDTH - LEFT - RIGHT;
    let x = |t: f64| LEFT + (t - t0) / span * plot;
    let height = TOP + LANE * clients.len() as f64 + AXIS;
    let axis_y = TOP + LANE * clients.len() as f64;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" font-family=\"{FONT}\">",
        num(WIDTH),
        num(height),
        num(WIDTH),
        num(height)
    );
    let _ = writeln!(out, "<style type=\"text/css\">{STYLE}</style>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"20.000\">{} ({}), makespan {} s</text>",
        num(LEFT),
        schedule.policy.as_str(),
        schedule.channel.as_str(),
        num(schedule.makespan_s)
    );

    for (lane, client) in clients.iter().enumerate() {
        let y = TOP + LANE * lane as f64;
        let _ = writeln!(out, "<g id=\"lane-{}\">", client.0);
        let _ = writeln!(out, "<line class=\"lane\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>", num(LEFT), num(y), num(LEFT + plot), num(y));
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>", num(LEFT - 8.0), num(y + LANE / 2.0 + 4.0), client);
        for phase in Phase::ALL {
            for iv in schedule.intervals.iter().filter(|i| i.client_id == *client && i.phase == phase) {
                let x0 = x(iv.start_s);
                let w = (x(iv.end_s) - x0).max(0.0);
                let _ = writeln!(
                    out,
                    "<rect class=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"><title>{} {} {}-{} s</title></rect>",
                    phase.as_str(),
                    num(x0),
                    num(y + (LANE - BAR) / 2.0),
                    num(w),
                    num(BAR),
                    client,
                    phase.as_str(),
                    num(iv.start_s - t0),
                    num(iv.end_s - t0)
                );
            }
        }
        out.push_str("</g>\n");
    }

    out.push_str("<g id=\"axis\">\n");
    let _ = writeln!(out, "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>", num(LEFT), num(axis_y), num(LEFT + plot), num(axis_y));
    let step = tick_step(span);
    let ticks = (span / step).floor() as u64;
    for k in 0..=ticks {
        let t = k as f64 * step;
        let tx = LEFT + t / span * plot;
        let _ = writeln!(out, "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>", num(tx), num(axis_y), num(tx), num(axis_y + 5.0));
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", num(tx), num(axis_y + 17.0), format_tick(t, step));
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">time (s)</text>", num(LEFT + plot / 2.0), num(axis_y + 33.0));
    out.push_str("</g>\n");

    let mx = x(t0 + schedule.makespan_s);
    let _ = writeln!(
        out,
        "<line id=\"makespan\" class=\"makespan\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
        num(mx),
        num(TOP - 6.0),
        num(mx),
        num(axis_y)
    );
    out.push_str("</svg>\n");
    out
}

fn format_tick(t: f64, step: f64) -> String {
    if step >= 1.0 {
        format!("{t:.0}")
    } else {
        let digits = (-step.log10()).ceil() as usize;
        format!("{t:.digits$}")
    }
}
