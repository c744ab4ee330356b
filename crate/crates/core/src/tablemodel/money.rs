//! Exact monetary values.
//!
//! Amounts are held as integer cents so that answer matching never goes
//! through floating point. Parsing accepts the US-style renderings found in
//! benefits tables (`$4,500.00`, `1,168`, `USD 12.5`) and rejects anything
//! with more than two decimals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoneyError {
    #[error("not a monetary value: {raw:?} ({reason})")]
    NotMoney { raw: String, reason: &'static str },
}

/// ISO-4217 style three letter currency code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Currency([u8; 3]);

impl Currency {
    pub const USD: Currency = Currency(*b"USD");
    pub const EUR: Currency = Currency(*b"EUR");
    pub const GBP: Currency = Currency(*b"GBP");

    pub fn new(code: &str) -> Option<Currency> {
        let bytes = code.as_bytes();
        if bytes.len() == 3 && bytes.iter().all(u8::is_ascii_uppercase) {
            Some(Currency([bytes[0], bytes[1], bytes[2]]))
        } else {
            None
        }
    }

    pub fn code(&self) -> &str {
        // Constructed only from ASCII uppercase bytes.
        std::str::from_utf8(&self.0).unwrap_or("USD")
    }

    fn symbol(&self) -> Option<char> {
        match &self.0 {
            b"USD" => Some('$'),
            b"EUR" => Some('€'),
            b"GBP" => Some('£'),
            _ => None,
        }
    }

    fn from_symbol(c: char) -> Option<Currency> {
        match c {
            '$' => Some(Currency::USD),
            '€' => Some(Currency::EUR),
            '£' => Some(Currency::GBP),
            _ => None,
        }
    }
}

impl Default for Currency {
    fn default() -> Self {
        Currency::USD
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for Currency {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Currency {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = String::deserialize(d)?;
        Currency::new(&code).ok_or_else(|| serde::de::Error::custom(format!("bad currency {code:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoneyValue {
    pub amount_cents: i64,
    #[serde(default)]
    pub currency: Currency,
}

impl MoneyValue {
    pub const fn usd(amount_cents: i64) -> MoneyValue {
        MoneyValue { amount_cents, currency: Currency::USD }
    }

    /// Canonical rendering, e.g. `$4,500.00` or `-$0.25`.
    pub fn render(&self) -> String {
        let abs = self.amount_cents.unsigned_abs();
        let dollars = abs / 100;
        let cents = abs % 100;
        let grouped = group_thousands(dollars);
        let sign = if self.amount_cents < 0 { "-" } else { "" };
        match self.currency.symbol() {
            Some(sym) => format!("{sign}{sym}{grouped}.{cents:02}"),
            None => format!("{sign}{} {grouped}.{cents:02}", self.currency.code()),
        }
    }
}

impl fmt::Display for MoneyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for MoneyValue {
    type Err = MoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_money(s)
    }
}

fn group_thousands(mut n: u64) -> String {
    if n == 0 {
        return "0".to_string();
    }
    let mut groups = Vec::new();
    while n > 0 {
        groups.push(n % 1000);
        n /= 1000;
    }
    let mut out = groups.pop().map(|g| g.to_string()).unwrap_or_default();
    while let Some(g) = groups.pop() {
        out.push_str(&format!(",{g:03}"));
    }
    out
}

/// Parses a money rendering into exact cents.
///
/// Accepts an optional sign, one currency symbol or three-letter code
/// (prefix or suffix), comma thousands separators and up to two decimals.
pub fn parse_money(raw: &str) -> Result<MoneyValue, MoneyError> {
    let fail = |reason| MoneyError::NotMoney { raw: raw.to_string(), reason };
    let mut s = raw.trim();
    if s.is_empty() {
        return Err(fail("empty"));
    }

    let mut negative = false;
    if let Some(rest) = s.strip_prefix('-') {
        negative = true;
        s = rest.trim_start();
    }

    let mut currency = None;
    if let Some(c) = s.chars().next() {
        if let Some(cur) = Currency::from_symbol(c) {
            currency = Some(cur);
            s = s[c.len_utf8()..].trim_start();
        }
    }
    if currency.is_none() && s.len() > 3 && s.is_char_boundary(3) {
        if let Some(cur) = Currency::new(&s[..3]) {
            currency = Some(cur);
            s = s[3..].trim_start();
        }
    }
    if currency.is_none() && s.len() > 3 && s.is_char_boundary(s.len() - 3) {
        if let Some(cur) = Currency::new(&s[s.len() - 3..]) {
            currency = Some(cur);
            s = s[..s.len() - 3].trim_end();
        }
    }
    if !negative {
        if let Some(rest) = s.strip_prefix('-') {
            negative = true;
            s = rest;
        }
    }

    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    if !s.bytes().any(|b| b.is_ascii_digit()) {
        return Err(fail("no digits"));
    }
    if int_part.is_empty() && frac_part.is_none() {
        return Err(fail("no digits"));
    }

    let mut dollars: i64 = 0;
    if !int_part.is_empty() {
        let groups: Vec<&str> = int_part.split(',').collect();
        for (i, g) in groups.iter().enumerate() {
            if g.is_empty() || !g.bytes().all(|b| b.is_ascii_digit()) {
                return Err(fail("malformed integer part"));
            }
            if i > 0 && g.len() != 3 {
                return Err(fail("misplaced thousands separator"));
            }
            if i == 0 && groups.len() > 1 && g.len() > 3 {
                return Err(fail("misplaced thousands separator"));
            }
            for b in g.bytes() {
                dollars = dollars
                    .checked_mul(10)
                    .and_then(|d| d.checked_add(i64::from(b - b'0')))
                    .ok_or_else(|| fail("overflow"))?;
            }
        }
    }

    let cents = match frac_part {
        None => 0,
        Some(f) => {
            if f.len() > 2 {
                return Err(fail("more than two decimals"));
            }
            if f.is_empty() && int_part.is_empty() {
                return Err(fail("no digits"));
            }
            if !f.bytes().all(|b| b.is_ascii_digit()) {
                return Err(fail("malformed decimals"));
            }
            match f.len() {
                0 => 0,
                1 => i64::from(f.as_bytes()[0] - b'0') * 10,
                _ => f.parse::<i64>().map_err(|_| fail("malformed decimals"))?,
            }
        }
    };

    let total = dollars
        .checked_mul(100)
        .and_then(|d| d.checked_add(cents))
        .ok_or_else(|| fail("overflow"))?;
    Ok(MoneyValue {
        amount_cents: if negative { -total } else { total },
        currency: currency.unwrap_or_default(),
    })
}

/// Finds the first `$`-style money token in free text.
pub fn find_money(text: &str) -> Option<MoneyValue> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (pos, &(start, c)) in chars.iter().enumerate() {
        if Currency::from_symbol(c).is_none() {
            continue;
        }
        let mut end = start + c.len_utf8();
        let mut seen_digit = false;
        for &(i, d) in &chars[pos + 1..] {
            if d.is_ascii_digit() {
                seen_digit = true;
                end = i + 1;
            } else if d == ',' || d == '.' {
                continue;
            } else {
                break;
            }
        }
        if !seen_digit {
            continue;
        }
        let token = &text[start..end];
        if let Ok(v) = parse_money(token) {
            return Some(v);
        }
    }
    None
}
