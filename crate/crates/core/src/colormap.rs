//! Byte classes and the RGB palette.
//!
//! | class              | bytes               | hue   |
//! |--------------------|---------------------|-------|
//! | `Null`             | `0x00`              | black |
//! | `Control`          | `0x01..=0x1F, 0x7F` | green |
//! | `Printable`        | `0x20..=0x7E`       | blue  |
//! | `Extended`         | `0x80..=0xFE`       | red   |
//! | `NonBreakingSpace` | `0xFF`              | white |
//!
//! Under [`Shading::ValueScaled`] the hue channel of the three ranged classes
//! runs linearly from 64 at the lowest byte of the class to 255 at the highest.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ByteClass {
    Null,
    Printable,
    Control,
    Extended,
    NonBreakingSpace,
}

impl ByteClass {
    pub const ALL: [ByteClass; 5] = [
        ByteClass::Null,
        ByteClass::Printable,
        ByteClass::Control,
        ByteClass::Extended,
        ByteClass::NonBreakingSpace,
    ];

    /// Lowest and highest byte value of the class. `Control` is not
    /// contiguous: its hull `0x01..=0x7F` also covers the printable range.
    pub fn range(self) -> (u8, u8) {
        match self {
            ByteClass::Null => (0x00, 0x00),
            ByteClass::Control => (0x01, 0x7F),
            ByteClass::Printable => (0x20, 0x7E),
            ByteClass::Extended => (0x80, 0xFE),
            ByteClass::NonBreakingSpace => (0xFF, 0xFF),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ByteClass::Null => "null",
            ByteClass::Printable => "printable",
            ByteClass::Control => "control",
            ByteClass::Extended => "extended",
            ByteClass::NonBreakingSpace => "nbsp",
        }
    }
}

impl fmt::Display for ByteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const fn classify_byte(b: u8) -> ByteClass {
    match b {
        0x00 => ByteClass::Null,
        0x01..=0x1F | 0x7F => ByteClass::Control,
        0x20..=0x7E => ByteClass::Printable,
        0x80..=0xFE => ByteClass::Extended,
        0xFF => ByteClass::NonBreakingSpace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0, 0, 0]);
    pub const WHITE: Rgb = Rgb([255, 255, 255]);
    pub const GRAY: Rgb = Rgb([128, 128, 128]);

    /// Index of the single nonzero channel, if exactly one is nonzero.
    pub fn dominant_channel(self) -> Option<usize> {
        let mut nonzero = self.0.iter().enumerate().filter(|(_, &c)| c != 0);
        match (nonzero.next(), nonzero.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.0;
        write!(f, "#{r:02x}{g:02x}{b:02x}")
    }
}

impl FromStr for Rgb {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        if hex.len() != 6 || !hex.bytes().all(|c| c.is_ascii_hexdigit()) {
            return Err(SchemeError::BadColor(s.to_owned()));
        }
        let ch = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).unwrap();
        Ok(Rgb([ch(0), ch(2), ch(4)]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shading {
    Flat,
    #[default]
    ValueScaled,
}

impl Shading {
    pub fn name(self) -> &'static str {
        match self {
            Shading::Flat => "flat",
            Shading::ValueScaled => "value_scaled",
        }
    }
}

impl FromStr for Shading {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flat" => Ok(Shading::Flat),
            "value_scaled" | "value-scaled" => Ok(Shading::ValueScaled),
            _ => Err(SchemeError::BadShading(s.to_owned())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemeError {
    #[error("invalid color {0:?}, expected #rrggbb")]
    BadColor(String),
    #[error("invalid shading {0:?}, expected flat or value_scaled")]
    BadShading(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("class {0} must use a single nonzero channel")]
    NotSingleChannel(ByteClass),
    #[error("classes {0} and {1} share a dominant channel")]
    SharedChannel(ByteClass, ByteClass),
    #[error("no color given for class {0}")]
    MissingClass(ByteClass),
    #[error("null must be #000000 and nbsp must be #ffffff")]
    FixedColor,
    #[error("padding color {0} is producible by byte {1:#04x}")]
    PaddingReachable(Rgb, u8),
}

/// A validated palette. Construct with [`ColorScheme::new`] or parse the
/// key-value text form; both reject palettes where the class or the padding
/// marker could not be recovered from a pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorScheme {
    class_hue: BTreeMap<ByteClass, Rgb>,
    shading: Shading,
    padding: Rgb,
}

impl Default for ColorScheme {
    fn default() -> Self {
        Self::binvis(Shading::ValueScaled)
    }
}

impl ColorScheme {
    /// Blue printable, green control, red extended, black null, white 0xFF.
    pub fn binvis(shading: Shading) -> Self {
        let hues = [
            (ByteClass::Null, Rgb::BLACK),
            (ByteClass::Printable, Rgb([0, 0, 255])),
            (ByteClass::Control, Rgb([0, 255, 0])),
            (ByteClass::Extended, Rgb([255, 0, 0])),
            (ByteClass::NonBreakingSpace, Rgb::WHITE),
        ];
        ColorScheme {
            class_hue: hues.into_iter().collect(),
            shading,
            padding: Rgb::GRAY,
        }
    }

    pub fn new(
        class_hue: BTreeMap<ByteClass, Rgb>,
        shading: Shading,
        padding: Rgb,
    ) -> Result<Self, SchemeError> {
        let scheme = ColorScheme {
            class_hue,
            shading,
            padding,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    fn validate(&self) -> Result<(), SchemeError> {
        if let Some(&class) = ByteClass::ALL.iter().find(|c| !self.class_hue.contains_key(c)) {
            return Err(SchemeError::MissingClass(class));
        }
        if self.hue(ByteClass::Null) != Rgb::BLACK || self.hue(ByteClass::NonBreakingSpace) != Rgb::WHITE {
            return Err(SchemeError::FixedColor);
        }
        let ranged = [ByteClass::Printable, ByteClass::Control, ByteClass::Extended];
        let mut seen: [Option<ByteClass>; 3] = [None; 3];
        for class in ranged {
            let ch = self
                .hue(class)
                .dominant_channel()
                .ok_or(SchemeError::NotSingleChannel(class))?;
            if let Some(other) = seen[ch] {
                return Err(SchemeError::SharedChannel(other, class));
            }
            seen[ch] = Some(class);
        }
        if let Some(b) = (0..=255u8).find(|&b| self.color_of(b) == self.padding) {
            return Err(SchemeError::PaddingReachable(self.padding, b));
        }
        Ok(())
    }

    /// Same hues under a different shading; revalidated since the padding
    /// color may become reachable.
    pub fn with_shading(&self, shading: Shading) -> Result<Self, SchemeError> {
        Self::new(self.class_hue.clone(), shading, self.padding)
    }

    pub fn shading(&self) -> Shading {
        self.shading
    }

    pub fn padding_color(&self) -> Rgb {
        self.padding
    }

    pub fn hue(&self, class: ByteClass) -> Rgb {
        self.class_hue[&class]
    }

    pub fn color_of(&self, b: u8) -> Rgb {
        let class = classify_byte(b);
        let hue = self.hue(class);
        match (class, self.shading) {
            (ByteClass::Null, _) => Rgb::BLACK,
            (ByteClass::NonBreakingSpace, _) => Rgb::WHITE,
            (_, Shading::Flat) => hue,
            (_, Shading::ValueScaled) => {
                let ch = hue.dominant_channel().expect("validated");
                let mut out = [0u8; 3];
                out[ch] = scaled_intensity(b, class.range());
                Rgb(out)
            }
        }
    }

    /// Full 256-entry lookup table.
    pub fn table(&self) -> [Rgb; 256] {
        std::array::from_fn(|b| self.color_of(b as u8))
    }

    /// Plain-text `key = value` form. Keys are class names, `shading` and
    /// `padding`; one per line, lines starting with `#` are comments.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for class in ByteClass::ALL {
            out.push_str(&format!("{} = {}\n", class.name(), self.hue(class)));
        }
        out.push_str(&format!("shading = {}\n", self.shading.name()));
        out.push_str(&format!("padding = {}\n", self.padding));
        out
    }

    pub fn parse_config(text: &str) -> Result<Self, SchemeError> {
        let mut scheme = ColorScheme::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |msg: &str| SchemeError::Syntax {
                line: i + 1,
                msg: msg.to_owned(),
            };
            let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "shading" => scheme.shading = value.parse()?,
                "padding" => scheme.padding = value.parse()?,
                _ => {
                    let class = ByteClass::ALL
                        .into_iter()
                        .find(|c| c.name() == key)
                        .ok_or_else(|| syntax(&format!("unknown key {key:?}")))?;
                    scheme.class_hue.insert(class, value.parse()?);
                }
            }
        }
        scheme.validate()?;
        Ok(scheme)
    }

    /// Short stable fingerprint of the palette (first 16 hex digits of the
    /// SHA-256 of the config text).
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_config_string().as_bytes());
        hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `64 + round(191 * (b - lo) / (hi - lo))`, rounding half up, in integers.
fn scaled_intensity(b: u8, (lo, hi): (u8, u8)) -> u8 {
    let num = 191 * u32::from(b - lo);
    let den = u32::from(hi - lo);
    (64 + (2 * num + den) / (2 * den)) as u8
}

pub fn color_of(b: u8, scheme: &ColorScheme) -> Rgb {
    scheme.color_of(b)
}

/// Per-class byte counts, indexed in [`ByteClass::ALL`] order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassHistogram {
    pub null: u64,
    pub printable: u64,
    pub control: u64,
    pub extended: u64,
    pub nbsp: u64,
}

impl ClassHistogram {
    pub fn add(&mut self, bytes: &[u8]) {
        for &b in bytes {
            *self.slot(classify_byte(b)) += 1;
        }
    }

    fn slot(&mut self, class: ByteClass) -> &mut u64 {
        match class {
            ByteClass::Null => &mut self.null,
            ByteClass::Printable => &mut self.printable,
            ByteClass::Control => &mut self.control,
            ByteClass::Extended => &mut self.extended,
            ByteClass::NonBreakingSpace => &mut self.nbsp,
        }
    }

    pub fn get(&self, class: ByteClass) -> u64 {
        match class {
            ByteClass::Null => self.null,
            ByteClass::Printable => self.printable,
            ByteClass::Control => self.control,
            ByteClass::Extended => self.extended,
            ByteClass::NonBreakingSpace => self.nbsp,
        }
    }

    pub fn total(&self) -> u64 {
        ByteClass::ALL.iter().map(|&c| self.get(c)).sum()
    }

    pub fn fraction(&self, class: ByteClass) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.get(class) as f64 / total as f64)
    }

    /// Share of bytes that render black or white.
    pub fn black_white_fraction(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| (self.null + self.nbsp) as f64 / total as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn named_bytes() {
        assert_eq!(classify_byte(0x00), ByteClass::Null);
        assert_eq!(classify_byte(0xFF), ByteClass::NonBreakingSpace);
        assert_eq!(classify_byte(b'A'), ByteClass::Printable);
        assert_eq!(classify_byte(0x07), ByteClass::Control);
        assert_eq!(classify_byte(0x7F), ByteClass::Control);
        assert_eq!(classify_byte(0x9C), ByteClass::Extended);
        assert_eq!(classify_byte(b' '), ByteClass::Printable);
    }

    #[test]
    fn partition_counts() {
        let mut h = ClassHistogram::default();
        h.add(&(0..=255u8).collect::<Vec<_>>());
        assert_eq!(
            (h.null, h.printable, h.control, h.extended, h.nbsp),
            (1, 95, 32, 127, 1)
        );
        assert_eq!(h.total(), 256);
    }

    #[test]
    fn scaled_examples() {
        let s = ColorScheme::default();
        assert_eq!(s.color_of(0x00), Rgb::BLACK);
        assert_eq!(s.color_of(0xFF), Rgb::WHITE);
        assert_eq!(s.color_of(0x20), Rgb([0, 0, 64]));
        assert_eq!(s.color_of(0x7E), Rgb([0, 0, 255]));
        // 64 + round(191 * 47 / 94) = 64 + round(95.5) = 160
        assert_eq!(s.color_of(0x4F), Rgb([0, 0, 160]));
        assert_eq!(s.color_of(0x01), Rgb([0, 64, 0]));
        assert_eq!(s.color_of(0x7F), Rgb([0, 255, 0]));
        assert_eq!(s.color_of(0x80), Rgb([64, 0, 0]));
        assert_eq!(s.color_of(0xFE), Rgb([255, 0, 0]));
    }

    #[test]
    fn scaled_matches_float_formula() {
        let s = ColorScheme::default();
        for b in 0..=255u8 {
            let class = classify_byte(b);
            if matches!(class, ByteClass::Null | ByteClass::NonBreakingSpace) {
                continue;
            }
            let (lo, hi) = class.range();
            let expect = 64.0 + (191.0 * f64::from(b - lo) / f64::from(hi - lo)).round();
            let got = s.color_of(b);
            let ch = got.dominant_channel().unwrap();
            assert_eq!(f64::from(got.0[ch]), expect, "byte {b:#04x}");
        }
    }

    #[test]
    fn flat_shading() {
        let s = ColorScheme::binvis(Shading::Flat);
        assert_eq!(s.color_of(0x41), Rgb([0, 0, 255]));
        assert_eq!(s.color_of(0x07), Rgb([0, 255, 0]));
        assert_eq!(s.color_of(0x9C), Rgb([255, 0, 0]));
        assert_eq!(s.color_of(0x00), Rgb::BLACK);
        assert_eq!(s.color_of(0xFF), Rgb::WHITE);
    }

    #[test]
    fn padding_never_produced() {
        for shading in [Shading::Flat, Shading::ValueScaled] {
            let s = ColorScheme::binvis(shading);
            assert!(s.table().iter().all(|&c| c != s.padding_color()));
        }
    }

    #[test]
    fn monotone_within_class_and_class_recoverable() {
        let s = ColorScheme::default();
        for class in [ByteClass::Printable, ByteClass::Control, ByteClass::Extended] {
            let members: Vec<u8> = (0..=255u8).filter(|&b| classify_byte(b) == class).collect();
            let ch = s.hue(class).dominant_channel().unwrap();
            for pair in members.windows(2) {
                assert!(s.color_of(pair[0]).0[ch] < s.color_of(pair[1]).0[ch]);
            }
        }
        let mut by_channel = BTreeMap::new();
        for b in 0..=255u8 {
            let class = classify_byte(b);
            let c = s.color_of(b);
            let key = match c {
                Rgb::BLACK => 3,
                Rgb::WHITE => 4,
                _ => c.dominant_channel().unwrap(),
            };
            assert_eq!(*by_channel.entry(key).or_insert(class), class);
        }
        assert_eq!(by_channel.len(), 5);
    }

    #[test]
    fn config_round_trip() {
        let s = ColorScheme::binvis(Shading::Flat);
        let text = s.to_config_string();
        assert!(text.contains("printable = #0000ff\n"));
        assert!(text.contains("shading = flat\n"));
        assert_eq!(ColorScheme::parse_config(&text).unwrap(), s);
        assert_ne!(s.digest(), ColorScheme::default().digest());
        assert_eq!(s.digest().len(), 16);
    }

    #[test]
    fn config_overrides_and_rejections() {
        let s = ColorScheme::parse_config("# swap hues\nprintable = #ff0000\nextended = #0000ff\n").unwrap();
        assert_eq!(s.color_of(0x7E), Rgb([255, 0, 0]));
        assert_eq!(
            ColorScheme::parse_config("printable = #00ff00"),
            Err(SchemeError::SharedChannel(ByteClass::Printable, ByteClass::Control))
        );
        assert_eq!(
            ColorScheme::parse_config("control = #102030"),
            Err(SchemeError::NotSingleChannel(ByteClass::Control))
        );
        assert_eq!(ColorScheme::parse_config("null = #010101"), Err(SchemeError::FixedColor));
        assert!(matches!(
            ColorScheme::parse_config("shading = flat\npadding = #0000ff"),
            Err(SchemeError::PaddingReachable(_, _))
        ));
        assert!(matches!(ColorScheme::parse_config("bogus"), Err(SchemeError::Syntax { line: 1, .. })));
        assert!(matches!(ColorScheme::parse_config("padding = #12"), Err(SchemeError::BadColor(_))));
    }

    proptest! {
        #[test]
        fn classification_is_total(b in any::<u8>()) {
            let class = classify_byte(b);
            let (lo, hi) = class.range();
            prop_assert!(lo <= b && b <= hi);
            let hits = ByteClass::ALL.iter().filter(|&&c| classify_byte(b) == c).count();
            prop_assert_eq!(hits, 1);
        }
    }
}
