use std::fmt::Write;

use crate::report::{RunReport, StabilityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Text => text(report),
        Format::Machine => machine(report),
    }
}

pub fn machine(report: &RunReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

fn num(x: f64) -> String {
    // same digits as the machine output
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), num)
}

pub fn text(r: &RunReport) -> String {
    let mut o = String::new();
    let mo = &r.moduli;
    let _ = writeln!(o, "case      {} ({})", mo.case, mo.regime);
    let _ = writeln!(o, "m         {}", r.scenario.m);
    let _ = writeln!(o, "ends      s = {}, l = {}", r.topology.s, r.topology.l);
    let _ = writeln!(o, "dim I     {}", mo.dim_i);
    let bound = if mo.dim_o_exact { "exact" } else { "upper bound" };
    let _ = writeln!(o, "dim O     {} ({bound})", mo.dim_o);
    if mo.smooth {
        let _ = writeln!(o, "moduli    smooth of dimension {}", mo.dim_i);
    } else {
        let _ = writeln!(o, "moduli    zero set of a map I -> O, smoothness not guaranteed");
    }

    let _ = writeln!(o, "\nbreakdown of dim I");
    let width = mo.breakdown.iter().map(|t| t.name.chars().count()).max().unwrap_or(0).max(8);
    for t in &mo.breakdown {
        let pad = width - t.name.chars().count();
        let _ = writeln!(o, "  {}{}  {:>5}   [{}]", t.name, " ".repeat(pad), t.value, t.kind);
    }
    let _ = writeln!(o, "  {}  {:>5}", "=".repeat(width), mo.dim_i);
    if !mo.d_per_end.is_empty() {
        let d: Vec<String> = mo.d_per_end.iter().map(usize::to_string).collect();
        let _ = writeln!(o, "  d per AC end: {}", d.join(", "));
    }

    let _ = writeln!(o, "\ntopological blocks ({})", r.topology.block_case);
    for b in &r.topology.blocks {
        let _ = writeln!(o, "  block {:<20} {}", b.name, b.dim);
    }

    let f = &r.fredholm;
    let _ = writeln!(o, "\nindex");
    let rates: Vec<String> = f.reference_rates.iter().map(|&x| num(x)).collect();
    let _ = writeln!(
        o,
        "  index block at reference rates [{}]: ker {}, coker {}, index {}",
        rates.join(", "),
        f.reference.ker,
        f.reference.coker,
        f.reference.index
    );
    let _ = writeln!(o, "  index jump to the given rates: {:+}", f.index_jump);
    match &f.at_rates {
        Some(c) => {
            let _ = writeln!(o, "  at the given rates: ker {}, coker {}, index {}", c.ker, c.coker, c.index);
        }
        None => {
            let _ = writeln!(o, "  at the given rates: index {}", f.index);
        }
    }

    if !r.ends.is_empty() {
        let _ = writeln!(o, "\nexceptional weights");
    }
    for e in &r.ends {
        let _ = writeln!(
            o,
            "  end {} {} rate {} link {} window [{}, {}] cutoff {}{}",
            e.index,
            e.kind,
            num(e.rate),
            e.link,
            num(e.window[0]),
            num(e.window[1]),
            num(e.spectrum.cutoff),
            e.spectrum.assumed_cutoff.map_or(String::new(), |a| format!(" (assumed {})", num(a)))
        );
        let ws: Vec<String> = e
            .weights
            .iter()
            .map(|w| format!("{}x{}", num(w.gamma), w.multiplicity))
            .collect();
        let _ = writeln!(o, "    weights {}", if ws.is_empty() { "none".into() } else { ws.join(" ") });
        let _ = writeln!(o, "    nearest {} at distance {}", opt(e.nearest_weight), opt(e.distance));
    }

    if !r.stability.is_empty() {
        let _ = writeln!(o, "\nstability");
        o.push_str(&stability_lines(&r.stability));
    }

    let _ = writeln!(o, "\ncross-check");
    for i in &r.cross_check {
        let mark = if i.holds { "ok" } else { "FAILED" };
        let _ = writeln!(o, "  {mark:<6} {} ({} = {})", i.name, i.lhs, i.rhs);
    }

    if !r.warnings.is_empty() {
        let _ = writeln!(o, "\nwarnings");
        for w in &r.warnings {
            let _ = writeln!(o, "  {w}");
        }
    }
    o
}

pub fn stability_lines(verdicts: &[StabilityReport]) -> String {
    let mut o = String::new();
    for v in verdicts {
        let verdict = if v.stable { "stable" } else { "unstable" };
        let _ = writeln!(
            o,
            "  end {} {verdict}: multiplicities at 0, 1, 2 found {:?} expected {:?} ({})",
            v.index,
            v.found,
            v.expected,
            v.deviations.join(", ")
        );
        if !v.extra_weights.is_empty() {
            let ws: Vec<String> = v
                .extra_weights
                .iter()
                .map(|w| format!("{}x{}", num(w.gamma), w.multiplicity))
                .collect();
            let _ = writeln!(o, "    extra weights up to 2: {}", ws.join(" "));
        }
        let _ = writeln!(
            o,
            "    epsilon_max {}, rate within (2, 2 + epsilon_max): {}",
            opt(v.epsilon_max),
            v.mu_near_two
        );
    }
    o
}
