use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{finish, rng_for, xml_escape, DatagenError, GeneratedPage, PageSpec, Provenance, Style, SvgWriter};
use crate::layout::{DocumentType, SemanticLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CreaseAxis {
    /// Fold lines run left to right; points move up and down.
    Horizontal,
    /// Fold lines run top to bottom; points move left and right.
    Vertical,
}

/// Perspective plus crease deformation of a page.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpParams {
    /// Pixel displacement of the top-left, top-right, bottom-right and
    /// bottom-left page corners.
    pub corners: [[f64; 2]; 4],
    pub crease_amplitude: f64,
    /// Full sine cycles across the page.
    pub crease_frequency: f64,
    pub crease_axis: CreaseAxis,
}

impl WarpParams {
    pub fn identity() -> Self {
        WarpParams {
            corners: [[0.0; 2]; 4],
            crease_amplitude: 0.0,
            crease_frequency: 0.0,
            crease_axis: CreaseAxis::Horizontal,
        }
    }

    /// Mild random perspective (corners moved by up to 6% of the page) and
    /// a crease of up to 4% of the page height.
    pub fn random(seed: u64, page_w: u32, page_h: u32) -> Self {
        let mut rng = rng_for(seed, 0x3a4b);
        let (w, h) = (f64::from(page_w), f64::from(page_h));
        let mut corners = [[0.0; 2]; 4];
        for c in &mut corners {
            c[0] = rng.random_range(-0.06..0.06) * w;
            c[1] = rng.random_range(-0.06..0.06) * h;
        }
        WarpParams {
            corners,
            crease_amplitude: rng.random_range(0.0..0.04) * h,
            crease_frequency: rng.random_range(0.5..3.0),
            crease_axis: if rng.random_bool(0.5) {
                CreaseAxis::Horizontal
            } else {
                CreaseAxis::Vertical
            },
        }
    }

    /// Checks the invariants and returns the displaced page quadrilateral.
    pub fn validate(&self, page_w: u32, page_h: u32) -> Result<[[f64; 2]; 4], DatagenError> {
        if !self.crease_amplitude.is_finite()
            || !self.crease_frequency.is_finite()
            || self.crease_amplitude.abs() >= 0.1 * f64::from(page_h)
        {
            return Err(DatagenError::AmplitudeTooLarge {
                amplitude: self.crease_amplitude,
                page_h,
            });
        }
        let (w, h) = (f64::from(page_w), f64::from(page_h));
        let base = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
        let mut quad = base;
        for (q, d) in quad.iter_mut().zip(&self.corners) {
            q[0] += d[0];
            q[1] += d[1];
        }
        if !is_strictly_convex(&quad) {
            return Err(DatagenError::NonConvex);
        }
        Ok(quad)
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn is_strictly_convex(quad: &[[f64; 2]; 4]) -> bool {
    if quad.iter().flatten().any(|v| !v.is_finite()) {
        return false;
    }
    let turns: Vec<f64> = (0..4)
        .map(|i| cross(quad[i], quad[(i + 1) % 4], quad[(i + 2) % 4]))
        .collect();
    turns.iter().all(|&t| t > 0.0) || turns.iter().all(|&t| t < 0.0)
}

pub(crate) fn point_in_polygon(quad: &[[f64; 2]; 4], p: [f64; 2]) -> bool {
    let mut inside = false;
    let mut j = 3;
    for i in 0..4 {
        let (a, b) = (quad[i], quad[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Projective map from the unit square onto a quadrilateral.
#[derive(Debug, Clone, Copy)]
struct Homography {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    f: f64,
    g: f64,
    h: f64,
}

impl Homography {
    fn square_to_quad(q: &[[f64; 2]; 4]) -> Self {
        let [[x0, y0], [x1, y1], [x2, y2], [x3, y3]] = *q;
        let (dx3, dy3) = (x0 - x1 + x2 - x3, y0 - y1 + y2 - y3);
        if dx3.abs() < 1e-12 && dy3.abs() < 1e-12 {
            return Homography {
                a: x1 - x0,
                b: x2 - x1,
                c: x0,
                d: y1 - y0,
                e: y2 - y1,
                f: y0,
                g: 0.0,
                h: 0.0,
            };
        }
        let (dx1, dx2, dy1, dy2) = (x1 - x2, x3 - x2, y1 - y2, y3 - y2);
        let den = dx1 * dy2 - dy1 * dx2;
        let g = (dx3 * dy2 - dy3 * dx2) / den;
        let h = (dx1 * dy3 - dy1 * dx3) / den;
        Homography {
            a: x1 - x0 + g * x1,
            b: x3 - x0 + h * x3,
            c: x0,
            d: y1 - y0 + g * y1,
            e: y3 - y0 + h * y3,
            f: y0,
            g,
            h,
        }
    }

    fn apply(&self, u: f64, v: f64) -> [f64; 2] {
        let w = self.g * u + self.h * v + 1.0;
        [
            (self.a * u + self.b * v + self.c) / w,
            (self.d * u + self.e * v + self.f) / w,
        ]
    }
}

struct Warp {
    hom: Homography,
    params: WarpParams,
    phase: f64,
    w: f64,
    h: f64,
}

impl Warp {
    fn map(&self, x: f64, y: f64) -> [f64; 2] {
        let (u, v) = (x / self.w, y / self.h);
        let [mut px, mut py] = self.hom.apply(u, v);
        let amp = self.params.crease_amplitude;
        let freq = self.params.crease_frequency;
        match self.params.crease_axis {
            CreaseAxis::Horizontal => py += amp * (TAU * freq * u + self.phase).sin(),
            CreaseAxis::Vertical => px += amp * (TAU * freq * v + self.phase).sin(),
        }
        [px, py]
    }
}

/// Where one element of the base page ended up after warping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedOutline {
    pub order: usize,
    pub label: SemanticLabel,
    /// Top-left, top-right, bottom-right, bottom-left.
    pub quad: [[f64; 2]; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpRecord {
    pub params: WarpParams,
    pub phase: f64,
    pub page_quad: [[f64; 2]; 4],
    pub outlines: Vec<WarpedOutline>,
}

fn points(quad: &[[f64; 2]; 4]) -> String {
    quad.iter()
        .map(|p| format!("{:.2},{:.2}", p[0], p[1]))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Simulates a photograph of a digital page. The element list is replaced
/// by holistic ground truth (all contents in reading order); the warped
/// element outlines survive only in the provenance record.
pub fn warp_photographed(spec: &PageSpec, params: &WarpParams, seed: u64) -> Result<GeneratedPage, DatagenError> {
    if spec.doc_type != DocumentType::Digital {
        return Err(DatagenError::InvalidSpec("only digital pages can be warped".into()));
    }
    spec.validate()?;
    let page_quad = params.validate(spec.page_w, spec.page_h)?;
    let phase = rng_for(seed, 0xfa1d).random_range(0.0..TAU);
    let warp = Warp {
        hom: Homography::square_to_quad(&page_quad),
        params: *params,
        phase,
        w: f64::from(spec.page_w),
        h: f64::from(spec.page_h),
    };

    let style = Style::from_id(spec.provenance.style_id.unwrap_or(0));
    let mut svg = SvgWriter::new(spec.page_w, spec.page_h, &Style { background: "#6b6b6b", ..style });
    let outer: Vec<[f64; 2]> = [(0.0, 0.0), (warp.w, 0.0), (warp.w, warp.h), (0.0, warp.h)]
        .iter()
        .map(|&(x, y)| warp.map(x, y))
        .collect();
    let outer: [[f64; 2]; 4] = outer.try_into().expect("four corners");
    svg.raw(&format!(r#"<polygon points="{}" fill="{}"/>"#, points(&outer), style.background));

    let mut outlines = Vec::with_capacity(spec.elements.len());
    for e in &spec.elements {
        let b = e.bbox;
        let (x1, y1, x2, y2) = (f64::from(b.x1), f64::from(b.y1), f64::from(b.x2), f64::from(b.y2));
        let quad = [warp.map(x1, y1), warp.map(x2, y1), warp.map(x2, y2), warp.map(x1, y2)];
        // Text is drawn in base coordinates under the affine map fixed by
        // the warped top-left, top-right and bottom-left corners.
        let (bw, bh) = (x2 - x1, y2 - y1);
        let ma = (quad[1][0] - quad[0][0]) / bw;
        let mb = (quad[1][1] - quad[0][1]) / bw;
        let mc = (quad[3][0] - quad[0][0]) / bh;
        let md = (quad[3][1] - quad[0][1]) / bh;
        let me = quad[0][0] - ma * x1 - mc * y1;
        let mf = quad[0][1] - mb * x1 - md * y1;
        svg.raw(&format!(
            r#"<g data-label="{}" data-order="{}"><polygon points="{}" fill="none" stroke="none"/><g transform="matrix({ma:.6} {mb:.6} {mc:.6} {md:.6} {me:.3} {mf:.3})">"#,
            e.label,
            e.order,
            points(&quad)
        ));
        if let Some(content) = spec.contents.get(&e.order) {
            for (i, line) in content.as_str().lines().enumerate() {
                let y = y1 + 14.0 * (1.2 * i as f64 + 1.0);
                if y > y2 {
                    break;
                }
                svg.raw(&format!(
                    r#"<text x="{}" y="{y}" font-size="14" xml:space="preserve">{}</text>"#,
                    x1 + 4.0,
                    xml_escape(line)
                ));
            }
        }
        svg.raw("</g></g>");
        outlines.push(WarpedOutline {
            order: e.order,
            label: e.label,
            quad,
        });
    }

    let mut provenance = Provenance::new("warp", seed);
    provenance.style_id = spec.provenance.style_id;
    provenance.base = Some(spec.id.clone());
    provenance.warp = Some(WarpRecord {
        params: *params,
        phase,
        page_quad,
        outlines,
    });
    let out = PageSpec {
        id: format!("{}-warped-{seed}", spec.id),
        page_w: spec.page_w,
        page_h: spec.page_h,
        doc_type: DocumentType::Photographed,
        elements: Vec::new(),
        contents: Default::default(),
        holistic_text: Some(spec.reading_order_text()),
        provenance,
    };
    Ok(finish(out, svg.finish()))
}
