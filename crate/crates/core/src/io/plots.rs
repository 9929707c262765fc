//! SVG plots: log-log decay curves with fitted slopes, and the energy
//! budget of a 2D run.

use crate::error::{Error, Result};
use crate::heat1d::fit_decay;
use plotters::prelude::*;
use std::path::Path;

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

const PALETTE: [RGBColor; 5] = [BLUE, RED, GREEN, MAGENTA, BLACK];

/// One curve of a decay plot.
pub struct DecaySeries<'a> {
    pub label: &'a str,
    pub times: &'a [f64],
    pub values: &'a [f64],
}

fn check_samples(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::Plot("times and values differ in length".into()));
    }
    if times.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "a plot needs at least 2 samples, got {}",
            times.len()
        )));
    }
    Ok(())
}

/// Plots `values` against `1+t` on log-log axes and annotates each curve with
/// the slope fitted over `window`. Returns the slopes.
pub fn decay_plot(
    path: &Path,
    title: &str,
    series: &[DecaySeries],
    window: (f64, f64),
) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::InsufficientSamples("no series to plot".into()));
    }
    let mut slopes = Vec::new();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for s in series {
        check_samples(s.times, s.values)?;
        slopes.push(fit_decay(s.times, s.values, window)?);
        for (t, v) in s.times.iter().zip(s.values) {
            if *v > 0.0 {
                xmin = xmin.min(1.0 + t);
                xmax = xmax.max(1.0 + t);
                ymin = ymin.min(*v);
                ymax = ymax.max(*v);
            }
        }
    }
    if !(xmax > xmin && ymax > 0.0) {
        return Err(Error::InsufficientSamples(
            "fewer than 2 positive samples".into(),
        ));
    }
    if ymax <= ymin {
        ymax = ymin * 2.0;
    }
    let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d(
            (xmin..xmax).log_scale(),
            (ymin * 0.8..ymax * 1.25).log_scale(),
        )
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("1 + t")
        .y_desc("value")
        .draw()
        .map_err(plot_err)?;
    for (i, (s, slope)) in series.iter().zip(&slopes).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .times
            .iter()
            .zip(s.values)
            .filter(|(_, v)| **v > 0.0)
            .map(|(t, v)| (1.0 + t, *v))
            .collect();
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("{}: fitted slope {slope:.2}", s.label))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(slopes)
}

/// Energy `∥u∥²_{𝓗¹}` and the running budget `∥u∥² + ∫𝒟` against the `ε₀²` line.
pub fn energy_plot(
    path: &Path,
    times: &[f64],
    energy: &[f64],
    budget: &[f64],
    eps0: f64,
) -> Result<()> {
    check_samples(times, energy)?;
    check_samples(times, budget)?;
    let line = eps0 * eps0;
    let top = energy.iter().chain(budget).copied().fold(line, f64::max) * 1.1;
    let (t0, t1) = (times[0], *times.last().unwrap());
    let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("energy budget", ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(90)
        .build_cartesian_2d(t0..t1, 0.0..top.max(f64::MIN_POSITIVE))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("t")
        .y_desc("energy")
        .draw()
        .map_err(plot_err)?;
    let curves: [(&str, &[f64], RGBColor); 2] = [
        ("∥u∥² (H¹ weighted)", energy, BLUE),
        ("∥u∥² + ∫D", budget, RED),
    ];
    for (label, ys, color) in curves {
        chart
            .draw_series(LineSeries::new(
                times.iter().copied().zip(ys.iter().copied()),
                color.stroke_width(2),
            ))
            .map_err(plot_err)?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .draw_series(LineSeries::new(
            vec![(t0, line), (t1, line)],
            BLACK.stroke_width(1),
        ))
        .map_err(plot_err)?
        .label(format!("ε₀² = {line:.3e}"))
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], BLACK));
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.svg");
        let e = energy_plot(&p, &[0.0], &[1e-4], &[1e-4], 0.01).unwrap_err();
        assert!(e.to_string().contains("insufficient samples"));
        let s = DecaySeries {
            label: "x",
            times: &[1.0],
            values: &[1.0],
        };
        let e = decay_plot(&p, "d", &[s], (0.5, 1.0)).unwrap_err();
        assert!(e.to_string().contains("insufficient samples"));
    }

    #[test]
    fn power_law_slope_is_annotated() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.svg");
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 5.0).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * (1.0 + t).powf(-1.5)).collect();
        let slopes = decay_plot(
            &p,
            "decay",
            &[DecaySeries {
                label: "power law",
                times: &times,
                values: &values,
            }],
            (10.0, 1000.0),
        )
        .unwrap();
        assert!((slopes[0] + 1.5).abs() < 1e-10);
        let svg = std::fs::read_to_string(&p).unwrap();
        assert!(
            svg.contains("fitted slope -1.50"),
            "{}",
            &svg[..svg.len().min(400)]
        );
    }

    #[test]
    fn energy_plot_draws_budget_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.svg");
        let t = [0.0, 1.0, 2.0];
        energy_plot(&p, &t, &[1e-4, 5e-5, 3e-5], &[1e-4, 9e-5, 8e-5], 0.01).unwrap();
        let svg = std::fs::read_to_string(&p).unwrap();
        assert!(svg.contains("ε₀²"));
    }
}
