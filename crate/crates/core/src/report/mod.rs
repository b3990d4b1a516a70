//! SVG charts for error profiles, imputation overlays and sampling masks.
//!
//! Boxplots use type-7 quantiles (linear interpolation between order
//! statistics). Whiskers reach the most extreme values within 1.5 × IQR of
//! the box; anything beyond is drawn as an outlier. Every raw error is drawn
//! as one `class="pt"` element in boxplots, and every mean in line and bar
//! charts, so charts can be checked by counting elements.

mod svg;

use std::fmt;
use std::str::FromStr;

use crate::bench::ErrorProfile;
use crate::error::{Error, Result};
use crate::imputers::ImputationResult;
use crate::series::{MissingnessMask, TimeSeries};

use svg::{colour, escape, tick_label, Scale, Svg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlotType {
    #[default]
    Boxplot,
    Line,
    Bar,
}

impl FromStr for PlotType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boxplot" => Ok(PlotType::Boxplot),
            "line" => Ok(PlotType::Line),
            "bar" => Ok(PlotType::Bar),
            other => Err(Error::Config(format!(
                "unknown plot type `{other}` (expected boxplot, line or bar)"
            ))),
        }
    }
}

impl fmt::Display for PlotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlotType::Boxplot => "boxplot",
            PlotType::Line => "line",
            PlotType::Bar => "bar",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub plot_type: PlotType,
    pub title: String,
    pub width: u32,
    pub height: u32,
    /// Draw withheld true values as open circles (overlays only).
    pub show_missing: bool,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            plot_type: PlotType::Boxplot,
            title: String::new(),
            width: 900,
            height: 540,
            show_missing: false,
        }
    }
}

impl PlotSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("plot dimensions must be positive".into()));
        }
        Ok(())
    }
}

/// Type-7 sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Config("no values to summarise".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = sorted.iter().filter(|&&v| v >= lo_fence && v <= hi_fence);
    let whisker_low = inside.clone().copied().fold(f64::INFINITY, f64::min);
    let whisker_high = inside.copied().fold(f64::NEG_INFINITY, f64::max);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < lo_fence || v > hi_fence)
        .collect();
    Ok(BoxStats {
        q1,
        median,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    })
}

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn new(spec: &PlotSpec) -> Self {
        Self {
            left: MARGIN_LEFT,
            right: (spec.width as f64 - MARGIN_RIGHT).max(MARGIN_LEFT + 10.0),
            top: MARGIN_TOP,
            bottom: (spec.height as f64 - MARGIN_BOTTOM).max(MARGIN_TOP + 10.0),
        }
    }
}

fn draw_title(svg: &mut Svg, spec: &PlotSpec) {
    if !spec.title.is_empty() {
        svg.text(
            spec.width as f64 / 2.0,
            22.0,
            "middle",
            r#"class="title" font-size="15""#,
            &spec.title,
        );
    }
}

fn draw_y_axis(svg: &mut Svg, frame: &Frame, y: &Scale, label: &str) {
    svg.open_group(r#"class="axis y""#);
    svg.line(
        frame.left,
        frame.top,
        frame.left,
        frame.bottom,
        r#"stroke="black""#,
    );
    for t in y.ticks(6) {
        let py = y.map(t);
        svg.line(frame.left - 4.0, py, frame.left, py, r#"stroke="black""#);
        svg.line(frame.left, py, frame.right, py, r##"stroke="#e5e5e5""##);
        svg.text(frame.left - 7.0, py + 4.0, "end", "", &tick_label(t));
    }
    let mid = (frame.top + frame.bottom) / 2.0;
    svg.text(
        18.0,
        mid,
        "middle",
        &format!(r#"transform="rotate(-90 18 {mid:.2})""#),
        label,
    );
    svg.close_group();
}

fn draw_legend(svg: &mut Svg, frame: &Frame, names: &[&str]) {
    svg.open_group(r#"class="legend""#);
    for (i, name) in names.iter().enumerate() {
        let y = frame.top + 10.0 + 20.0 * i as f64;
        let x = frame.right + 20.0;
        svg.rect(x, y - 9.0, 12.0, 12.0, &format!(r#"fill="{}""#, colour(i)));
        svg.text(x + 18.0, y + 1.0, "start", "", name);
    }
    svg.close_group();
}

/// Charts a profile: boxplots of raw errors, or lines/bars of the means.
pub fn render_errors(profile: &ErrorProfile, spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    profile
        .validate()
        .map_err(|e| Error::Config(format!("cannot plot profile: {e}")))?;
    let frame = Frame::new(spec);
    let grid = &profile.missing_percent;
    let k = profile.methods.len();

    let values: Vec<f64> = match spec.plot_type {
        PlotType::Boxplot => profile
            .methods
            .iter()
            .flat_map(|m| m.errall.iter().flatten().copied())
            .collect(),
        PlotType::Line | PlotType::Bar => profile
            .methods
            .iter()
            .flat_map(|m| m.means.iter().copied())
            .collect(),
    };
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if spec.plot_type == PlotType::Bar || lo > 0.0 {
        lo = lo.min(0.0);
    }
    let y = Scale::padded(lo, hi, frame.bottom, frame.top);
    let slot = (frame.right - frame.left) / grid.len() as f64;
    let centre = |g: usize| frame.left + slot * (g as f64 + 0.5);
    let band = slot * 0.8 / k as f64;
    let offset = |g: usize, m: usize| centre(g) - slot * 0.4 + band * (m as f64 + 0.5);

    let mut svg = Svg::new(spec.width, spec.height);
    if spec.plot_type == PlotType::Boxplot && profile.repetitions() == 1 {
        svg.comment("warning: one repetition per cell, boxes collapse to lines");
    }
    draw_title(&mut svg, spec);
    draw_y_axis(&mut svg, &frame, &y, &profile.parameter);

    svg.open_group(r#"class="axis x""#);
    svg.line(
        frame.left,
        frame.bottom,
        frame.right,
        frame.bottom,
        r#"stroke="black""#,
    );
    for (g, p) in grid.iter().enumerate() {
        let x = centre(g);
        svg.line(x, frame.bottom, x, frame.bottom + 4.0, r#"stroke="black""#);
        svg.text(x, frame.bottom + 17.0, "middle", "", &tick_label(*p));
    }
    svg.text(
        (frame.left + frame.right) / 2.0,
        frame.bottom + 38.0,
        "middle",
        "",
        "missing (%)",
    );
    svg.close_group();

    for (mi, method) in profile.methods.iter().enumerate() {
        let c = colour(mi);
        svg.open_group(&format!(
            r#"class="series" data-method="{}""#,
            escape(&method.name)
        ));
        match spec.plot_type {
            PlotType::Boxplot => {
                for (g, row) in method.errall.iter().enumerate() {
                    draw_box(
                        &mut svg,
                        &y,
                        offset(g, mi),
                        band * 0.7,
                        row,
                        c,
                        &method.name,
                        grid[g],
                    )?;
                }
            }
            PlotType::Line => {
                let pts: Vec<(f64, f64)> = method
                    .means
                    .iter()
                    .enumerate()
                    .map(|(g, &v)| (centre(g), y.map(v)))
                    .collect();
                svg.polyline(
                    &pts,
                    &format!(
                        r#"class="line" data-method="{}" stroke="{c}" stroke-width="2""#,
                        escape(&method.name)
                    ),
                );
                for ((px, py), v) in pts.iter().zip(&method.means) {
                    svg.circle(
                        *px,
                        *py,
                        3.5,
                        &format!(r#"class="pt" data-value="{v}" fill="{c}""#),
                    );
                }
            }
            PlotType::Bar => {
                let base = y.map(0.0);
                for (g, &v) in method.means.iter().enumerate() {
                    let py = y.map(v);
                    svg.rect(
                        offset(g, mi) - band * 0.45,
                        py.min(base),
                        band * 0.9,
                        (py - base).abs(),
                        &format!(r#"class="pt bar" data-value="{v}" fill="{c}""#),
                    );
                }
            }
        }
        svg.close_group();
    }
    let names: Vec<&str> = profile.method_names().collect();
    draw_legend(&mut svg, &frame, &names);
    Ok(svg.finish())
}

#[allow(clippy::too_many_arguments)]
fn draw_box(
    svg: &mut Svg,
    y: &Scale,
    x: f64,
    width: f64,
    values: &[f64],
    c: &str,
    method: &str,
    percent: f64,
) -> Result<()> {
    let s = box_stats(values)?;
    svg.open_group(&format!(
        r#"class="box" data-method="{}" data-percent="{percent}" data-q1="{}" data-median="{}" data-q3="{}" data-whisker-low="{}" data-whisker-high="{}""#,
        escape(method),
        s.q1,
        s.median,
        s.q3,
        s.whisker_low,
        s.whisker_high
    ));
    let stroke = format!(r#"stroke="{c}""#);
    svg.line(x, y.map(s.whisker_low), x, y.map(s.q1), &stroke);
    svg.line(x, y.map(s.q3), x, y.map(s.whisker_high), &stroke);
    svg.line(
        x - width / 4.0,
        y.map(s.whisker_low),
        x + width / 4.0,
        y.map(s.whisker_low),
        &stroke,
    );
    svg.line(
        x - width / 4.0,
        y.map(s.whisker_high),
        x + width / 4.0,
        y.map(s.whisker_high),
        &stroke,
    );
    let top = y.map(s.q3);
    svg.rect(
        x - width / 2.0,
        top,
        width,
        y.map(s.q1) - top,
        &format!(r#"fill="{c}" fill-opacity="0.25" stroke="{c}""#),
    );
    svg.line(
        x - width / 2.0,
        y.map(s.median),
        x + width / 2.0,
        y.map(s.median),
        &format!(r#"stroke="{c}" stroke-width="2""#),
    );
    for &v in values {
        let outlier = v < s.whisker_low || v > s.whisker_high;
        if outlier {
            svg.circle(
                x,
                y.map(v),
                2.5,
                &format!(r#"class="pt outlier" data-value="{v}" fill="none" stroke="{c}""#),
            );
        } else {
            svg.circle(
                x,
                y.map(v),
                1.2,
                &format!(r#"class="pt" data-value="{v}" fill="{c}" fill-opacity="0.5""#),
            );
        }
    }
    svg.close_group();
    Ok(())
}

const KEPT: &str = "#d62728";
const IMPUTED: &str = "#1f77b4";

fn check_lengths(series: &TimeSeries, mask: &MissingnessMask) -> Result<()> {
    if mask.series_length() != series.len() {
        return Err(Error::LengthMismatch {
            expected: series.len(),
            actual: mask.series_length(),
        });
    }
    Ok(())
}

struct Facets {
    frame: Frame,
    height: f64,
    x: Scale,
    y_lo: f64,
    y_hi: f64,
}

impl Facets {
    fn new(spec: &PlotSpec, count: usize, n: usize, lo: f64, hi: f64) -> Self {
        let frame = Frame::new(spec);
        let height = (frame.bottom - frame.top) / count as f64;
        Self {
            x: Scale::padded(0.0, (n - 1) as f64, frame.left, frame.right),
            frame,
            height,
            y_lo: lo,
            y_hi: hi,
        }
    }

    fn y(&self, facet: usize) -> Scale {
        let top = self.frame.top + self.height * facet as f64 + 18.0;
        let bottom = self.frame.top + self.height * (facet + 1) as f64 - 6.0;
        Scale::padded(self.y_lo, self.y_hi, bottom, top.min(bottom - 1.0))
    }

    fn draw_frame(&self, svg: &mut Svg, facet: usize, label: &str) {
        let top = self.frame.top + self.height * facet as f64;
        svg.rect(
            self.frame.left,
            top,
            self.frame.right - self.frame.left,
            self.height - 2.0,
            r##"fill="none" stroke="#999999""##,
        );
        svg.text(
            self.frame.left + 6.0,
            top + 14.0,
            "start",
            r#"class="facet-label""#,
            label,
        );
        let y = self.y(facet);
        for t in y.ticks(3) {
            svg.text(
                self.frame.left - 7.0,
                y.map(t) + 4.0,
                "end",
                "",
                &tick_label(t),
            );
        }
    }

    fn draw_x_axis(&self, svg: &mut Svg, n: usize) {
        svg.open_group(r#"class="axis x""#);
        // Human-facing positions are one-based.
        for t in Scale::new(1.0, n as f64, 0.0, 1.0).ticks(8) {
            let px = self.x.map(t - 1.0);
            svg.line(
                px,
                self.frame.bottom,
                px,
                self.frame.bottom + 4.0,
                r#"stroke="black""#,
            );
            svg.text(px, self.frame.bottom + 17.0, "middle", "", &tick_label(t));
        }
        svg.text(
            (self.frame.left + self.frame.right) / 2.0,
            self.frame.bottom + 38.0,
            "middle",
            "",
            "observation",
        );
        svg.close_group();
    }
}

fn kept_points(svg: &mut Svg, facets: &Facets, y: &Scale, series: &TimeSeries, flags: &[bool]) {
    svg.open_group(&format!(r#"class="kept" fill="{KEPT}""#));
    for (i, &v) in series.values().iter().enumerate() {
        if !flags[i] {
            svg.circle(facets.x.map(i as f64), y.map(v), 2.0, "");
        }
    }
    svg.close_group();
}

fn withheld_points(
    svg: &mut Svg,
    facets: &Facets,
    y: &Scale,
    series: &TimeSeries,
    mask: &MissingnessMask,
) {
    svg.open_group(r#"class="withheld" fill="none" stroke="black""#);
    for &i in mask.removed() {
        svg.circle(facets.x.map(i as f64), y.map(series.values()[i]), 3.0, "");
    }
    svg.close_group();
}

/// One facet per method showing kept (red) and imputed (blue) values, and
/// optionally the withheld truth as open circles.
pub fn render_impute(
    series: &TimeSeries,
    mask: &MissingnessMask,
    results: &[(String, ImputationResult)],
    spec: &PlotSpec,
) -> Result<String> {
    spec.validate()?;
    if results.is_empty() {
        return Err(Error::Config("no imputation results to plot".into()));
    }
    check_lengths(series, mask)?;
    for (name, r) in results {
        if r.values().len() != series.len() {
            return Err(Error::Config(format!(
                "result for `{name}` has {} values, series has {}",
                r.values().len(),
                series.len()
            )));
        }
    }
    // The y range covers everything that could be drawn, so toggling the
    // withheld layer does not move anything else.
    let all = series
        .values()
        .iter()
        .chain(results.iter().flat_map(|(_, r)| r.values().iter()));
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let facets = Facets::new(spec, results.len(), series.len(), lo, hi);
    let flags = mask.flags();

    let mut svg = Svg::new(spec.width, spec.height);
    draw_title(&mut svg, spec);
    for (f, (name, result)) in results.iter().enumerate() {
        let y = facets.y(f);
        svg.open_group(&format!(r#"class="facet" data-method="{}""#, escape(name)));
        facets.draw_frame(&mut svg, f, name);
        kept_points(&mut svg, &facets, &y, series, &flags);
        svg.open_group(&format!(r#"class="imputed" fill="{IMPUTED}""#));
        for &i in mask.removed() {
            svg.circle(facets.x.map(i as f64), y.map(result.values()[i]), 2.0, "");
        }
        svg.close_group();
        if spec.show_missing {
            withheld_points(&mut svg, &facets, &y, series, mask);
        }
        svg.close_group();
    }
    facets.draw_x_axis(&mut svg, series.len());
    svg.open_group(r#"class="legend""#);
    let lx = facets.frame.right + 20.0;
    let ly = facets.frame.top + 10.0;
    svg.circle(lx, ly, 4.0, &format!(r#"fill="{KEPT}""#));
    svg.text(lx + 10.0, ly + 4.0, "start", "", "kept");
    svg.circle(lx, ly + 20.0, 4.0, &format!(r#"fill="{IMPUTED}""#));
    svg.text(lx + 10.0, ly + 24.0, "start", "", "imputed");
    svg.circle(lx, ly + 40.0, 4.0, r#"fill="none" stroke="black""#);
    svg.text(lx + 10.0, ly + 44.0, "start", "", "withheld");
    svg.close_group();
    Ok(svg.finish())
}

/// Strip plots of sampling masks: kept values in red, withheld values as
/// open circles, one facet per labelled mask.
pub fn render_masks(
    series: &TimeSeries,
    masks: &[(String, MissingnessMask)],
    spec: &PlotSpec,
) -> Result<String> {
    spec.validate()?;
    if masks.is_empty() {
        return Err(Error::Config("no masks to plot".into()));
    }
    for (_, m) in masks {
        check_lengths(series, m)?;
    }
    let lo = series
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = series
        .values()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let facets = Facets::new(spec, masks.len(), series.len(), lo, hi);
    let mut svg = Svg::new(spec.width, spec.height);
    draw_title(&mut svg, spec);
    for (f, (label, mask)) in masks.iter().enumerate() {
        let y = facets.y(f);
        svg.open_group(&format!(r#"class="facet" data-label="{}""#, escape(label)));
        facets.draw_frame(&mut svg, f, label);
        kept_points(&mut svg, &facets, &y, series, &mask.flags());
        withheld_points(&mut svg, &facets, &y, series, mask);
        svg.close_group();
    }
    facets.draw_x_axis(&mut svg, series.len());
    Ok(svg.finish())
}
