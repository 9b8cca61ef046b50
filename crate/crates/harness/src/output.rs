//! CSV and SVG output.
//!
//! Layout of an experiment directory:
//!
//! | file | columns |
//! |------|---------|
//! | `resolved.toml` | the full config that produced the run |
//! | `transcripts_<agent>.csv` | `seed,t,action,reward,regret,cum_regret[,violation],converged,member` |
//! | `summary.csv` | `experiment,agent,seeds,t,mean_cumulative_regret,stderr,constraint_violation,theory_bound,unconverged` |
//! | `simplex.csv` | `seed,t,kind,p0,p1,p2,g,member` (snapshot experiments) |
//!
//! `emit_plots` adds `plot_regret.csv` / `regret.svg`, and for constrained
//! runs `plot_violation.csv` / `violation.svg`, and for snapshots one
//! `simplex_t<t>.svg` per snapshot time.
//!
//! All files are UTF-8 with LF line endings, written to a temporary name
//! and renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::runner::RunOutput;
use crate::summary::{summarize, SummaryRow};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn csv_bytes<F>(fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        fill(&mut w)?;
        w.flush()?;
    }
    Ok(buf)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes transcripts, the summary and snapshot data under `dir`. Returns
/// the files written.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        let p = dir.join(name);
        write_atomic(&p, &bytes)?;
        written.push(p);
        Ok(())
    };
    put("resolved.toml".into(), out.config.to_toml().into_bytes())?;

    let constrained = out.runs.iter().any(|r| r.transcript.steps.iter().any(|s| s.violation.is_some()));
    for agent in &out.config.agents {
        let bytes = csv_bytes(|w| {
            let mut header = vec!["seed", "t", "action", "reward", "regret", "cum_regret"];
            if constrained {
                header.push("violation");
            }
            header.extend(["converged", "member"]);
            w.write_record(&header)?;
            for run in out.runs_of(agent) {
                for (s, cum) in run.transcript.steps.iter().zip(&run.transcript.cumulative_regret) {
                    let mut rec = vec![
                        run.seed.to_string(),
                        s.t.to_string(),
                        s.action.to_string(),
                        s.reward.to_string(),
                        s.regret.to_string(),
                        cum.to_string(),
                    ];
                    if constrained {
                        rec.push(opt(s.violation));
                    }
                    rec.push(s.converged.to_string());
                    rec.push(opt(s.member));
                    w.write_record(&rec)?;
                }
            }
            Ok(())
        })?;
        if out.runs_of(agent).next().is_some() {
            put(format!("transcripts_{agent}.csv"), bytes)?;
        }
    }

    if !out.runs.is_empty() {
        let rows = summarize(out);
        put(
            "summary.csv".into(),
            csv_bytes(|w| {
                for r in &rows {
                    w.serialize(r)?;
                }
                Ok(())
            })?,
        )?;
    }

    if !out.snapshot.is_empty() {
        put(
            "simplex.csv".into(),
            csv_bytes(|w| {
                w.write_record(["seed", "t", "kind", "p0", "p1", "p2", "g", "member"])?;
                for r in &out.snapshot {
                    w.write_record([
                        r.seed.to_string(),
                        r.t.to_string(),
                        r.kind.to_string(),
                        r.p[0].to_string(),
                        r.p[1].to_string(),
                        r.p[2].to_string(),
                        r.g.to_string(),
                        r.member.to_string(),
                    ])?;
                }
                Ok(())
            })?,
        )?;
    }
    Ok(written)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<SummaryRow>, _>>()?;
    Ok(rows)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Optional lower/upper band, same x values as `points`.
    pub band: Option<Vec<(f64, f64)>>,
    pub dashed: bool,
}

/// A self-contained SVG line chart.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, ml, mr, mt, mb) = (720.0, 440.0, 70.0, 150.0, 40.0, 50.0);
    let all = series.iter().flat_map(|s| {
        s.points
            .iter()
            .copied()
            .chain(s.band.iter().flatten().flat_map(|&(lo, hi)| [(f64::NAN, lo), (f64::NAN, hi)]))
    });
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        if x.is_finite() {
            x0 = x0.min(x);
            x1 = x1.max(x);
        }
        if y.is_finite() {
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{title}</text>"#, (ml + w - mr) / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(fx), h - mb + 16.0, fmt_tick(fx));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, ml - 6.0, py(fy) + 4.0, fmt_tick(fy));
        let _ = writeln!(s, r##"<line x1="{ml}" x2="{}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##, w - mr, py(fy), py(fy));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, (ml + w - mr) / 2.0, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text transform="translate(16,{}) rotate(-90)" text-anchor="middle">{y_label}</text>"#,
        (mt + h - mb) / 2.0
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if let Some(band) = &ser.band {
            let mut pts: Vec<String> = ser.points.iter().zip(band).map(|(p, b)| format!("{:.1},{:.1}", px(p.0), py(b.1))).collect();
            pts.extend(ser.points.iter().zip(band).rev().map(|(p, b)| format!("{:.1},{:.1}", px(p.0), py(b.0))));
            let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#, pts.join(" "));
        }
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#, pts.join(" "));
        let ly = mt + 16.0 + 18.0 * k as f64;
        let _ = writeln!(s, r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#, w - mr + 10.0, w - mr + 34.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - mr + 40.0, ly + 4.0, ser.label);
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn by_agent(rows: &[SummaryRow]) -> BTreeMap<&str, Vec<&SummaryRow>> {
    let mut m: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        m.entry(r.agent.as_str()).or_default().push(r);
    }
    m
}

/// Writes plot data and SVG charts next to the outputs in `dir`.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = dir.join("summary.csv");
    let simplex = dir.join("simplex.csv");
    if !summary.exists() && !simplex.exists() {
        bail!("no summary.csv or simplex.csv in {}", dir.display());
    }
    let mut written = Vec::new();
    if summary.exists() {
        let rows = read_summary(&summary)?;
        if rows.is_empty() {
            bail!("{} has no rows", summary.display());
        }
        let name = rows[0].experiment.clone();
        let agents = by_agent(&rows);
        let n = agents.values().map(|v| v.len()).min().unwrap_or(0);

        let bytes = csv_bytes(|w| {
            let mut header = vec!["t".to_string()];
            for a in agents.keys() {
                header.extend([format!("{a}_mean"), format!("{a}_lo"), format!("{a}_hi")]);
            }
            header.push("theory_bound".into());
            w.write_record(&header)?;
            for k in 0..n {
                let first = agents.values().next().expect("non-empty")[k];
                let mut rec = vec![first.t.to_string()];
                for v in agents.values() {
                    let r = v[k];
                    rec.push(r.mean_cumulative_regret.to_string());
                    rec.push((r.mean_cumulative_regret - r.stderr).to_string());
                    rec.push((r.mean_cumulative_regret + r.stderr).to_string());
                }
                rec.push(first.theory_bound.to_string());
                w.write_record(&rec)?;
            }
            Ok(())
        })?;
        let p = dir.join("plot_regret.csv");
        write_atomic(&p, &bytes)?;
        written.push(p);

        let mut series: Vec<Series> = agents
            .iter()
            .map(|(a, v)| Series {
                label: a.to_string(),
                points: v.iter().map(|r| (r.t as f64, r.mean_cumulative_regret)).collect(),
                band: Some(
                    v.iter()
                        .map(|r| (r.mean_cumulative_regret - r.stderr, r.mean_cumulative_regret + r.stderr))
                        .collect(),
                ),
                dashed: false,
            })
            .collect();
        let regret_svg = line_chart_svg(&format!("{name}: cumulative regret"), "t", "regret", &series);
        let p = dir.join("regret.svg");
        write_atomic(&p, regret_svg.as_bytes())?;
        written.push(p);
        series.clear();

        if rows.iter().any(|r| r.constraint_violation.is_some()) {
            let bytes = csv_bytes(|w| {
                let mut header = vec!["t".to_string()];
                header.extend(agents.keys().map(|a| format!("{a}_violation")));
                w.write_record(&header)?;
                for k in 0..n {
                    let mut rec = vec![agents.values().next().expect("non-empty")[k].t.to_string()];
                    rec.extend(agents.values().map(|v| opt(v[k].constraint_violation)));
                    w.write_record(&rec)?;
                }
                Ok(())
            })?;
            let p = dir.join("plot_violation.csv");
            write_atomic(&p, &bytes)?;
            written.push(p);
            let series: Vec<Series> = agents
                .iter()
                .map(|(a, v)| Series {
                    label: a.to_string(),
                    points: v
                        .iter()
                        .map(|r| (r.t as f64, r.constraint_violation.unwrap_or(f64::NAN)))
                        .collect(),
                    band: None,
                    dashed: false,
                })
                .collect();
            let svg = line_chart_svg(&format!("{name}: constraint violation"), "t", "violation (ℓ∞)", &series);
            let p = dir.join("violation.svg");
            write_atomic(&p, svg.as_bytes())?;
            written.push(p);
        }
    }
    if simplex.exists() {
        written.extend(simplex_svgs(&simplex, dir)?);
    }
    Ok(written)
}

fn simplex_svgs(path: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut by_t: BTreeMap<(u64, usize), Vec<(String, [f64; 3], bool)>> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let seed: u64 = rec[0].parse()?;
        let t: usize = rec[1].parse()?;
        let p = [rec[3].parse()?, rec[4].parse()?, rec[5].parse()?];
        by_t.entry((seed, t)).or_default().push((rec[2].to_string(), p, &rec[7] == "true"));
    }
    let first_seed = by_t.keys().next().map(|k| k.0);
    let mut written = Vec::new();
    for ((seed, t), pts) in &by_t {
        if Some(*seed) != first_seed {
            continue;
        }
        let (w, h) = (420.0, 380.0);
        let corner = [(210.0, 30.0), (30.0, 340.0), (390.0, 340.0)];
        let xy = |p: &[f64; 3]| {
            (
                p[0] * corner[0].0 + p[1] * corner[1].0 + p[2] * corner[2].0,
                p[0] * corner[0].1 + p[1] * corner[1].1 + p[2] * corner[2].1,
            )
        };
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="210" y="18" text-anchor="middle">optimistic set, t = {t}</text>"#);
        for (_, p, member) in pts.iter().filter(|x| x.0 == "grid") {
            let (x, y) = xy(p);
            let fill = if *member { "#9ecae1" } else { "#f0f0f0" };
            let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="1.6" fill="{fill}"/>"#);
        }
        for (kind, p, _) in pts.iter().filter(|x| x.0 != "grid") {
            let (x, y) = xy(p);
            let color = if kind == "vbos" { "#d62728" } else { "#111" };
            let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="5" fill="{color}"/>"#);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{kind}</text>"#, x + 7.0, y - 5.0);
        }
        for (k, (x, y)) in corner.iter().enumerate() {
            let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">arm {k}</text>"#, if k == 0 { y - 4.0 } else { y + 16.0 });
        }
        s.push_str("</svg>\n");
        let p = dir.join(format!("simplex_t{t}.svg"));
        write_atomic(&p, s.as_bytes())?;
        written.push(p);
    }
    Ok(written)
}
