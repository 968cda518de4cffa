//! Angles written as numbers or as simple multiples of pi.

use std::f64::consts::PI;

use serde::de::{self, Deserializer, Visitor};

/// Parses `"0.3"`, `"pi"`, `"-pi/2"`, `"3pi/4"`, `"3*pi/4"` or `"1.5*pi"`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid angle {text:?}: expected a number or a multiple of pi such as \"3*pi/4\"");
    let Some(at) = s.find("pi") else {
        return s.parse().map_err(|_| bad());
    };
    let (head, tail) = (&s[..at], &s[at + 2..]);
    let factor = match head.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        num => num.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match tail {
        "" => 1.0,
        t => t.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).filter(|d| *d != 0.0).ok_or_else(bad)?,
    };
    Ok(factor * PI / divisor)
}

struct AngleVisitor;

impl Visitor<'_> for AngleVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("an angle in radians or a string like \"pi/2\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_angle(v).map_err(E::custom)
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(AngleVisitor)
}
