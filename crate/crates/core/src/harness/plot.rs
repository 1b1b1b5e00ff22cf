//! SVG line plots of summary curves on a log-x axis. Solid lines are means,
//! dashed lines are mean plus one standard deviation.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{BanditError, Result};

use super::aggregate::SummaryRow;

/// Which accumulated regret the regret panel shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegretMode {
    /// `Σ_τ Δ(A_τ)`.
    #[default]
    Pseudo,
    /// `Σ_τ Δ(π_τ)`.
    Expected,
}

impl std::str::FromStr for RegretMode {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pseudo" => Ok(RegretMode::Pseudo),
            "expected" => Ok(RegretMode::Expected),
            other => Err(BanditError::param(format!(
                "unknown regret mode '{other}' (expected pseudo or expected)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    Regret(RegretMode),
    NormalizedVariance,
}

impl Panel {
    fn title(&self) -> &'static str {
        match self {
            Panel::Regret(RegretMode::Pseudo) => "Cumulative regret (pseudo)",
            Panel::Regret(RegretMode::Expected) => "Cumulative regret (expected)",
            Panel::NormalizedVariance => "Cumulative variance / 2Kt",
        }
    }

    fn values(&self, r: &SummaryRow) -> (f64, f64) {
        match self {
            Panel::Regret(RegretMode::Pseudo) => (r.pseudo_regret_mean, r.pseudo_regret_std),
            Panel::Regret(RegretMode::Expected) => (r.expected_regret_mean, r.expected_regret_std),
            Panel::NormalizedVariance => (r.norm_variance_mean, r.norm_variance_std),
        }
    }
}

/// Algorithm names to draw; `None` draws everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesSelection(pub Option<Vec<String>>);

impl SeriesSelection {
    pub fn parse(list: &str) -> Self {
        SeriesSelection(Some(
            list.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
        ))
    }

    pub fn select<'a>(
        &self,
        groups: &'a [(String, Vec<SummaryRow>)],
    ) -> Result<Vec<&'a (String, Vec<SummaryRow>)>> {
        match &self.0 {
            None => Ok(groups.iter().collect()),
            Some(names) => names
                .iter()
                .map(|n| {
                    groups
                        .iter()
                        .find(|(g, _)| g == n)
                        .ok_or_else(|| BanditError::UnknownSeries(n.clone()))
                })
                .collect(),
        }
    }
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

fn draw_err<E: std::error::Error>(path: &Path, e: E) -> BanditError {
    BanditError::Format {
        path: path.to_path_buf(),
        message: format!("drawing failed: {e}"),
    }
}

/// Renders `panel` for the selected series as an SVG string.
pub fn render_svg(
    groups: &[(String, Vec<SummaryRow>)],
    selection: &SeriesSelection,
    panel: Panel,
) -> Result<String> {
    let series = selection.select(groups)?;
    let points: Vec<(&str, Vec<(f64, f64, f64)>)> = series
        .iter()
        .map(|(name, rows)| {
            let pts = rows
                .iter()
                .filter_map(|r| {
                    let (m, s) = panel.values(r);
                    (m.is_finite() && r.checkpoint_t > 0).then(|| (r.checkpoint_t as f64, m, m + s.max(0.0)))
                })
                .collect();
            (name.as_str(), pts)
        })
        .collect();

    let xs = points.iter().flat_map(|(_, p)| p.iter().map(|q| q.0));
    let (mut x_lo, mut x_hi) = xs.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (1.0, 10.0);
    }
    if x_hi <= x_lo {
        (x_lo, x_hi) = (x_lo / 2.0, x_hi * 2.0);
    }
    let y_hi = points
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.2.max(q.1)))
        .filter(|y| y.is_finite())
        .fold(0.0f64, f64::max);
    let y_lo = points
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.1))
        .fold(0.0f64, f64::min);
    let y_hi = if y_hi > y_lo { y_hi * 1.05 } else { y_lo + 1.0 };

    let mut svg = String::new();
    let here = Path::new("<svg>");
    {
        let root = SVGBackend::with_string(&mut svg, (800, 500)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| draw_err(here, e))?;
        let mut chart = ChartBuilder::on(&root)
            .caption(panel.title(), ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(70)
            .build_cartesian_2d((x_lo..x_hi).log_scale(), y_lo..y_hi)
            .map_err(|e| draw_err(here, e))?;
        chart
            .configure_mesh()
            .x_desc("t")
            .x_label_formatter(&|x| format!("{x:.0e}"))
            .draw()
            .map_err(|e| draw_err(here, e))?;
        for (i, (name, pts)) in points.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            chart
                .draw_series(LineSeries::new(pts.iter().map(|p| (p.0, p.1)), color.stroke_width(2)))
                .map_err(|e| draw_err(here, e))?
                .label(*name)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
            chart
                .draw_series(DashedLineSeries::new(pts.iter().map(|p| (p.0, p.2)), 4, 4, color.stroke_width(1)))
                .map_err(|e| draw_err(here, e))?;
            if pts.len() == 1 {
                chart
                    .draw_series(std::iter::once(Circle::new((pts[0].0, pts[0].1), 3, color.filled())))
                    .map_err(|e| draw_err(here, e))?;
            }
        }
        chart
            .configure_series_labels()
            .position(SeriesLabelPosition::UpperLeft)
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(|e| draw_err(here, e))?;
        root.present().map_err(|e| draw_err(here, e))?;
    }
    Ok(svg)
}

pub fn emit_plot(
    groups: &[(String, Vec<SummaryRow>)],
    selection: &SeriesSelection,
    panel: Panel,
    path: &Path,
) -> Result<()> {
    let svg = render_svg(groups, selection, panel)?;
    std::fs::write(path, svg).map_err(|e| BanditError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: u64, m: f64) -> SummaryRow {
        SummaryRow {
            checkpoint_t: t,
            pseudo_regret_mean: m,
            pseudo_regret_std: 1.0,
            expected_regret_mean: m,
            expected_regret_std: 1.0,
            norm_variance_mean: f64::NAN,
            norm_variance_std: f64::NAN,
            subopt_pulls_mean: m,
            theorem2_bound: f64::NAN,
            theorem3_bound: 1.0,
            eq5_satisfied: false,
        }
    }

    #[test]
    fn renders_selected_series() {
        let groups = vec![
            ("EXP3".to_string(), (1..100).map(|t| row(t, t as f64)).collect()),
            ("UCB1".to_string(), (1..100).map(|t| row(t, 2.0 * t as f64)).collect()),
        ];
        let svg = render_svg(&groups, &SeriesSelection::parse("UCB1"), Panel::Regret(RegretMode::Pseudo)).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("UCB1") && !svg.contains("EXP3"));
        assert!(svg.contains("stroke-dasharray") || svg.matches("<polyline").count() >= 2);
    }

    #[test]
    fn unknown_series_rejected() {
        let groups = vec![("EXP3".to_string(), vec![row(1, 1.0)])];
        let err = render_svg(&groups, &SeriesSelection::parse("NOPE"), Panel::NormalizedVariance).unwrap_err();
        assert!(matches!(err, BanditError::UnknownSeries(ref s) if s == "NOPE"));
    }

    #[test]
    fn degenerate_inputs_still_render() {
        let groups = vec![("EXP3".to_string(), vec![row(5, 3.0)])];
        let svg = render_svg(&groups, &SeriesSelection::default(), Panel::Regret(RegretMode::Expected)).unwrap();
        assert!(svg.contains("<circle"));
        // All-NaN variance: empty axes, no failure.
        render_svg(&groups, &SeriesSelection::default(), Panel::NormalizedVariance).unwrap();
    }
}
