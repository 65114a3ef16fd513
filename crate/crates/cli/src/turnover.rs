//! `construct-turnover`: build and certify initial data that turn over, and
//! the certificate document.

use std::path::{Path, PathBuf};

use anyhow::Result;
use muskat_core::curve::Curve;
use muskat_core::quadrature::QuadratureSpec;
use muskat_core::turnover::{construct_turning_datum, Conditions, TurnoverCertificate};

use crate::output::{prepare_dir, write_atomic, write_manifest};
use crate::snapshot::SnapshotState;
use crate::text::Doc;

pub const CURVE_FILE: &str = "curve.dat";
pub const CERTIFICATE_FILE: &str = "certificate.txt";

pub fn certificate_doc(c: &TurnoverCertificate, spec: &QuadratureSpec) -> Doc {
    let mut d = Doc::versioned("turnover-certificate");
    d.num("beta1", c.beta1)
        .num("beta2", c.beta2)
        .num("b", c.b)
        .put("n_modes", c.n_modes.to_string())
        .num("integral_value", c.integral_value)
        .num("integral_error", c.integral_error)
        .num("dz2_at_0", c.dz2_at_0);
    let k = &c.conditions;
    let mut cond = Doc::new();
    cond.flag("odd", k.odd)
        .flag("slope_positive_away_from_0", k.slope_positive_away_from_0)
        .flag("slope_zero_at_0", k.slope_zero_at_0)
        .flag("dz2_positive_at_0", k.dz2_positive_at_0)
        .flag("arc_chord_finite", k.arc_chord_finite);
    d.section("conditions", cond);
    let mut q = Doc::new();
    q.num("rel_tol", spec.rel_tol)
        .num("abs_tol", spec.abs_tol)
        .num("local_window", spec.local_window)
        .put("taylor_order", spec.taylor_order.to_string())
        .put("max_panels", spec.max_panels.to_string());
    d.section("quadrature", q);
    d.put("verdict", if c.passed() { "pass" } else { "fail" });
    d
}

pub fn parse_certificate(doc: &Doc) -> Result<(TurnoverCertificate, QuadratureSpec)> {
    anyhow::ensure!(doc.text("kind")? == "turnover-certificate", "not a turnover certificate");
    let version = doc.usize("format_version")?;
    anyhow::ensure!(version == crate::text::FORMAT_VERSION as usize, "unsupported format_version {version}");
    let k = doc.sub("conditions")?;
    let conditions = Conditions {
        odd: k.bool("odd")?,
        slope_positive_away_from_0: k.bool("slope_positive_away_from_0")?,
        slope_zero_at_0: k.bool("slope_zero_at_0")?,
        dz2_positive_at_0: k.bool("dz2_positive_at_0")?,
        arc_chord_finite: k.bool("arc_chord_finite")?,
    };
    let cert = TurnoverCertificate {
        beta1: doc.f64("beta1")?,
        beta2: doc.f64("beta2")?,
        b: doc.f64("b")?,
        n_modes: doc.usize("n_modes")?,
        integral_value: doc.f64("integral_value")?,
        integral_error: doc.f64("integral_error")?,
        dz2_at_0: doc.f64("dz2_at_0")?,
        conditions,
    };
    let q = doc.sub("quadrature")?;
    let spec = QuadratureSpec {
        rel_tol: q.f64("rel_tol")?,
        abs_tol: q.f64("abs_tol")?,
        local_window: q.f64("local_window")?,
        taylor_order: q.usize("taylor_order")?,
        max_panels: q.usize("max_panels")?,
    };
    Ok((cert, spec))
}

pub fn read_certificate(path: &Path) -> Result<(TurnoverCertificate, QuadratureSpec)> {
    use anyhow::Context;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_certificate(&Doc::parse(&text)?).with_context(|| format!("parsing {}", path.display()))
}

pub struct Constructed {
    pub certificate: TurnoverCertificate,
    pub dir: PathBuf,
}

/// Construct, certify and write the datum; construction failures are
/// returned as the core error so the caller can map them to exit codes.
pub fn construct(beta1: f64, beta2: f64, n_modes: usize, spec: &QuadratureSpec, dir: &Path, force: bool) -> Result<Constructed> {
    let datum = construct_turning_datum(beta1, beta2, n_modes, spec)?;
    prepare_dir(dir, force)?;
    let curve: &Curve = &datum.curve;
    write_atomic(&dir.join(CURVE_FILE), curve.to_snapshot(0.0, "contour").render().as_bytes())?;
    write_atomic(&dir.join(CERTIFICATE_FILE), certificate_doc(&datum.certificate, spec).render().as_bytes())?;
    let mut m = Doc::versioned("manifest");
    m.put("command", "construct-turnover")
        .put("tool", format!("muskat {}", env!("CARGO_PKG_VERSION")))
        .put("core", format!("muskat-core {}", muskat_core::VERSION));
    write_manifest(dir, m)?;
    Ok(Constructed { certificate: datum.certificate, dir: dir.to_path_buf() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_round_trip() {
        let c = TurnoverCertificate {
            beta1: 1.0,
            beta2: 2.0,
            b: 2.0,
            n_modes: 128,
            integral_value: -3.3765127421602346,
            integral_error: 3.29e-10,
            dz2_at_0: 0.123,
            conditions: Conditions {
                odd: true,
                slope_positive_away_from_0: true,
                slope_zero_at_0: true,
                dz2_positive_at_0: true,
                arc_chord_finite: true,
            },
        };
        let spec = QuadratureSpec::default();
        let text = certificate_doc(&c, &spec).render();
        let (back, s) = parse_certificate(&Doc::parse(&text).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(s, spec);
    }
}
