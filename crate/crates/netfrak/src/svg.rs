//! Minimal standalone SVG plots: a solid observed curve, an optional grey
//! envelope band, and an optional dashed reference line.

use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;

/// Dashed reference overlay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// No reference line (F and H).
    None,
    /// Horizontal line at 1 (Poisson J).
    UnitLevel,
    /// Diagonal value = r (Poisson K).
    Diagonal,
}

/// A curve on the shared r grid; undefined entries break the path.
#[derive(Debug, Clone)]
pub struct Curve<'a> {
    pub r: &'a [f64],
    pub value: &'a [Option<f64>],
}

/// Plot description: one observed curve, an optional pointwise band, and a
/// reference style.
pub struct Plot<'a> {
    pub ylabel: &'a str,
    pub observed: Curve<'a>,
    pub band: Option<(Curve<'a>, Curve<'a>)>,
    pub reference: Reference,
}

struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.xmin) / (self.xmax - self.xmin) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B - (v - self.ymin) / (self.ymax - self.ymin) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn path_data(frame: &Frame, curve: &Curve) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for (&r, v) in curve.r.iter().zip(curve.value) {
        match v {
            Some(y) => {
                let cmd = if pen_down { 'L' } else { 'M' };
                d.push_str(&format!("{}{:.2} {:.2} ", cmd, frame.x(r), frame.y(*y)));
                pen_down = true;
            }
            None => pen_down = false,
        }
    }
    d.trim_end().to_string()
}

fn band_data(frame: &Frame, lo: &Curve, hi: &Curve) -> String {
    // One subpath per maximal run where both bounds are defined.
    let mut d = String::new();
    let n = lo.r.len();
    let mut i = 0;
    while i < n {
        if lo.value[i].is_some() && hi.value[i].is_some() {
            let start = i;
            while i < n && lo.value[i].is_some() && hi.value[i].is_some() {
                i += 1;
            }
            let run: Vec<usize> = (start..i).collect();
            for (k, &j) in run.iter().enumerate() {
                let cmd = if k == 0 { 'M' } else { 'L' };
                d.push_str(&format!(
                    "{}{:.2} {:.2} ",
                    cmd,
                    frame.x(hi.r[j]),
                    frame.y(hi.value[j].unwrap())
                ));
            }
            for &j in run.iter().rev() {
                d.push_str(&format!(
                    "L{:.2} {:.2} ",
                    frame.x(lo.r[j]),
                    frame.y(lo.value[j].unwrap())
                ));
            }
            d.push_str("Z ");
        } else {
            i += 1;
        }
    }
    d.trim_end().to_string()
}

/// Render the plot as a standalone 800x600 SVG file.
pub fn write_svg(path: &Path, plot: &Plot) -> Result<()> {
    let defined: Vec<f64> = plot
        .observed
        .value
        .iter()
        .flatten()
        .copied()
        .chain(plot.band.iter().flat_map(|(lo, hi)| {
            lo.value
                .iter()
                .flatten()
                .chain(hi.value.iter().flatten())
                .copied()
        }))
        .collect();
    if defined.is_empty() {
        return Err(Error::AllUndefined);
    }
    let xmin = plot.observed.r.first().copied().unwrap_or(0.0);
    let xmax = plot.observed.r.last().copied().unwrap_or(1.0).max(xmin + 1e-12);
    let mut ymin = defined.iter().copied().fold(f64::INFINITY, f64::min);
    let mut ymax = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match plot.reference {
        Reference::UnitLevel => {
            ymin = ymin.min(1.0);
            ymax = ymax.max(1.0);
        }
        Reference::Diagonal => {
            ymin = ymin.min(0.0);
            ymax = ymax.max(xmax);
        }
        Reference::None => {}
    }
    if ymax - ymin < 1e-12 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let pad = 0.05 * (ymax - ymin);
    let frame = Frame {
        xmin,
        xmax,
        ymin: ymin - pad,
        ymax: ymax + pad,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if let Some((lo, hi)) = &plot.band {
        svg.push_str(&format!(
            "<path class=\"band\" d=\"{}\" fill=\"#cccccc\" stroke=\"none\"/>\n",
            band_data(&frame, lo, hi)
        ));
    }

    let ref_d = match plot.reference {
        Reference::None => None,
        Reference::UnitLevel => Some(format!(
            "M{:.2} {:.2} L{:.2} {:.2}",
            frame.x(xmin),
            frame.y(1.0),
            frame.x(xmax),
            frame.y(1.0)
        )),
        Reference::Diagonal => Some(format!(
            "M{:.2} {:.2} L{:.2} {:.2}",
            frame.x(xmin),
            frame.y(xmin),
            frame.x(xmax),
            frame.y(xmax)
        )),
    };
    if let Some(d) = ref_d {
        svg.push_str(&format!(
            "<path class=\"reference\" d=\"{d}\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n"
        ));
    }

    svg.push_str(&format!(
        "<path class=\"observed\" d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
        path_data(&frame, &plot.observed)
    ));

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = MARGIN_L,
        r = WIDTH - MARGIN_R,
        t = MARGIN_T,
        b = HEIGHT - MARGIN_B
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"16\">r</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 15.0
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" font-size=\"16\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        plot.ylabel
    ));
    for (v, label) in [(xmin, fmt_tick(xmin)), (xmax, fmt_tick(xmax))] {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
            frame.x(v),
            HEIGHT - MARGIN_B + 20.0,
            label
        ));
    }
    for v in [frame.ymin + pad, frame.ymax - pad] {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"12\">{}</text>\n",
            MARGIN_L - 8.0,
            frame.y(v) + 4.0,
            fmt_tick(v)
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.3}")
    }
}
