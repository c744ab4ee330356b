use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Month {
    January,
    February,
    March,
    April,
    May,
    June,
    July,
    August,
    September,
    October,
    November,
    December,
}

impl Month {
    pub const ALL: [Month; 12] = [
        Month::January,
        Month::February,
        Month::March,
        Month::April,
        Month::May,
        Month::June,
        Month::July,
        Month::August,
        Month::September,
        Month::October,
        Month::November,
        Month::December,
    ];

    /// 1 for January.
    pub fn number(self) -> u32 {
        self as u32 + 1
    }

    pub fn from_number(n: u32) -> Option<Month> {
        Month::ALL.get((n as usize).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        [
            "January",
            "February",
            "March",
            "April",
            "May",
            "June",
            "July",
            "August",
            "September",
            "October",
            "November",
            "December",
        ][self as usize]
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Month {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Month::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s.trim())).ok_or_else(|| format!("unknown month {s:?}"))
    }
}

/// Coverage tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    YouOnly,
    YouSpouse,
    YouPartner,
    YouChild,
    YouFamily,
}

impl Tier {
    pub const ALL: [Tier; 5] = [Tier::YouOnly, Tier::YouSpouse, Tier::YouPartner, Tier::YouChild, Tier::YouFamily];

    pub fn label(self) -> &'static str {
        match self {
            Tier::YouOnly => "you-only",
            Tier::YouSpouse => "you-spouse",
            Tier::YouPartner => "you-partner",
            Tier::YouChild => "you-child",
            Tier::YouFamily => "you-family",
        }
    }

    /// Column header text used in generated tables.
    pub fn header(self) -> &'static str {
        match self {
            Tier::YouOnly => "You only",
            Tier::YouSpouse => "You + spouse",
            Tier::YouPartner => "You + domestic partner",
            Tier::YouChild => "You + child(ren)",
            Tier::YouFamily => "You + family",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tier::ALL.into_iter().find(|t| t.label() == s.trim()).ok_or_else(|| format!("unknown tier {s:?}"))
    }
}

/// Benefit category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Benefit {
    HraContribution,
    NetworkDeductible,
    OutOfPocketMax,
}

impl Benefit {
    pub const ALL: [Benefit; 3] = [Benefit::HraContribution, Benefit::NetworkDeductible, Benefit::OutOfPocketMax];

    pub fn label(self) -> &'static str {
        match self {
            Benefit::HraContribution => "hra-contribution",
            Benefit::NetworkDeductible => "network-deductible",
            Benefit::OutOfPocketMax => "out-of-pocket-max",
        }
    }

    /// Row label used in reports.
    pub fn title(self) -> &'static str {
        match self {
            Benefit::HraContribution => "HRA contribution",
            Benefit::NetworkDeductible => "Network deductible",
            Benefit::OutOfPocketMax => "Out-of-pocket maximum",
        }
    }

    /// Table caption used in generated documents.
    pub fn caption(self) -> &'static str {
        match self {
            Benefit::HraContribution => "company HRA contribution",
            Benefit::NetworkDeductible => "network deductible",
            Benefit::OutOfPocketMax => "out-of-pocket maximum",
        }
    }
}

impl fmt::Display for Benefit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Benefit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Benefit::ALL.into_iter().find(|b| b.label() == s.trim()).ok_or_else(|| format!("unknown benefit {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryFacets {
    pub month: Option<Month>,
    pub tier: Option<Tier>,
    pub benefit: Option<Benefit>,
}

impl QueryFacets {
    pub fn full(month: Month, tier: Tier, benefit: Benefit) -> QueryFacets {
        QueryFacets { month: Some(month), tier: Some(tier), benefit: Some(benefit) }
    }

    pub fn is_empty(&self) -> bool {
        self.month.is_none() && self.tier.is_none() && self.benefit.is_none()
    }

    pub fn is_full(&self) -> bool {
        self.month.is_some() && self.tier.is_some() && self.benefit.is_some()
    }
}

/// Every facet value a text mentions, per dimension.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Mentions {
    pub months: BTreeSet<Month>,
    pub tiers: BTreeSet<Tier>,
    pub benefits: BTreeSet<Benefit>,
}

impl Mentions {
    /// True when, for each facet that is set, the text mentions that value and
    /// no other value of the same dimension.
    pub fn matches_exactly(&self, facets: &QueryFacets) -> bool {
        fn only<T: Ord>(set: &BTreeSet<T>, want: &Option<T>) -> bool {
            match want {
                None => true,
                Some(v) => set.len() == 1 && set.contains(v),
            }
        }
        only(&self.months, &facets.month) && only(&self.tiers, &facets.tier) && only(&self.benefits, &facets.benefit)
    }
}

#[derive(Debug, Clone, Copy)]
enum Facet {
    Month(Month),
    Tier(Tier),
    Benefit(Benefit),
}

const MONTH_ABBREVIATIONS: [(&str, Month); 12] = [
    ("jan", Month::January),
    ("feb", Month::February),
    ("mar", Month::March),
    ("apr", Month::April),
    ("jun", Month::June),
    ("jul", Month::July),
    ("aug", Month::August),
    ("sep", Month::September),
    ("sept", Month::September),
    ("oct", Month::October),
    ("nov", Month::November),
    ("dec", Month::December),
];

const TIER_PHRASES: &[(&str, Tier)] = &[
    ("you only", Tier::YouOnly),
    ("yourself", Tier::YouOnly),
    ("employee only", Tier::YouOnly),
    ("self only", Tier::YouOnly),
    ("self", Tier::YouOnly),
    ("you + spouse", Tier::YouSpouse),
    ("you and your spouse", Tier::YouSpouse),
    ("you and spouse", Tier::YouSpouse),
    ("employee + spouse", Tier::YouSpouse),
    ("spouse", Tier::YouSpouse),
    ("you + domestic partner", Tier::YouPartner),
    ("you + partner", Tier::YouPartner),
    ("you and your domestic partner", Tier::YouPartner),
    ("you and your partner", Tier::YouPartner),
    ("domestic partner", Tier::YouPartner),
    ("partner", Tier::YouPartner),
    ("you + child ren", Tier::YouChild),
    ("you + child", Tier::YouChild),
    ("you + children", Tier::YouChild),
    ("you and your child", Tier::YouChild),
    ("you and your children", Tier::YouChild),
    ("employee + children", Tier::YouChild),
    ("child ren", Tier::YouChild),
    ("child", Tier::YouChild),
    ("children", Tier::YouChild),
    ("you + family", Tier::YouFamily),
    ("you and your family", Tier::YouFamily),
    ("employee + family", Tier::YouFamily),
    ("family", Tier::YouFamily),
];

const BENEFIT_PHRASES: &[(&str, Benefit)] = &[
    ("company hra contribution", Benefit::HraContribution),
    ("hra contribution", Benefit::HraContribution),
    ("hra contributions", Benefit::HraContribution),
    ("hra", Benefit::HraContribution),
    ("network deductible", Benefit::NetworkDeductible),
    ("deductible", Benefit::NetworkDeductible),
    ("deductibles", Benefit::NetworkDeductible),
    ("out of pocket maximum", Benefit::OutOfPocketMax),
    ("out of pocket maximums", Benefit::OutOfPocketMax),
    ("out of pocket max", Benefit::OutOfPocketMax),
    ("out of pocket", Benefit::OutOfPocketMax),
];

fn vocabulary() -> &'static [(Vec<String>, Facet)] {
    use std::sync::OnceLock;
    static VOCAB: OnceLock<Vec<(Vec<String>, Facet)>> = OnceLock::new();
    VOCAB.get_or_init(|| {
        let words = |p: &str| p.split(' ').map(str::to_string).collect::<Vec<_>>();
        let mut v = Vec::new();
        for m in Month::ALL {
            v.push((vec![m.name().to_lowercase()], Facet::Month(m)));
        }
        for (a, m) in MONTH_ABBREVIATIONS {
            v.push((vec![a.to_string()], Facet::Month(m)));
        }
        for (p, t) in TIER_PHRASES {
            v.push((words(p), Facet::Tier(*t)));
        }
        for (p, b) in BENEFIT_PHRASES {
            v.push((words(p), Facet::Benefit(*b)));
        }
        v.sort_by_key(|e| std::cmp::Reverse(e.0.len()));
        v
    })
}

/// Lowercased words; `+` is a word of its own.
fn facet_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
            continue;
        }
        if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
        if c == '+' {
            out.push("+".to_string());
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Longest-match scan, left to right, over the synonym tables.
fn scan(text: &str) -> Vec<Facet> {
    let tokens = facet_tokens(text);
    let vocab = vocabulary();
    let mut found = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let hit = vocab.iter().find(|(phrase, _)| tokens[i..].starts_with(phrase));
        match hit {
            Some((phrase, facet)) => {
                found.push(*facet);
                i += phrase.len();
            }
            None => i += 1,
        }
    }
    found
}

/// Replaces abbreviated month names ("Oct", "Sept") with full ones, leaving
/// every other character in place.
pub fn expand_month_abbreviations(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        let lower = word.to_lowercase();
        match MONTH_ABBREVIATIONS.iter().find(|(a, _)| *a == lower) {
            Some((_, m)) => out.push_str(m.name()),
            None => out.push_str(word),
        }
        word.clear();
    };
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

/// The first month, tier and benefit mentioned in `text`.
pub fn extract_facets(text: &str) -> QueryFacets {
    let mut facets = QueryFacets::default();
    for f in scan(text) {
        match f {
            Facet::Month(m) => {
                facets.month.get_or_insert(m);
            }
            Facet::Tier(t) => {
                facets.tier.get_or_insert(t);
            }
            Facet::Benefit(b) => {
                facets.benefit.get_or_insert(b);
            }
        }
    }
    facets
}

pub fn facet_mentions(text: &str) -> Mentions {
    let mut m = Mentions::default();
    for f in scan(text) {
        match f {
            Facet::Month(x) => {
                m.months.insert(x);
            }
            Facet::Tier(x) => {
                m.tiers.insert(x);
            }
            Facet::Benefit(x) => {
                m.benefits.insert(x);
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn month_abbreviations_expand() {
        assert_eq!(
            expand_month_abbreviations("the out of pocket maximum for you and your partner in Oct?"),
            "the out of pocket maximum for you and your partner in October?"
        );
        assert_eq!(expand_month_abbreviations("Sept. and DEC, not octopus"), "September. and December, not octopus");
        assert_eq!(expand_month_abbreviations(""), "");
    }

    #[test]
    fn question_forms() {
        let cases = [
            ("What is the network deductible for yourself in January?", Month::January, Tier::YouOnly, Benefit::NetworkDeductible),
            ("What is February's out-of-pocket max for you and your spouse?", Month::February, Tier::YouSpouse, Benefit::OutOfPocketMax),
            (
                "What is March company HRA contribution for you and your domestic partner?",
                Month::March,
                Tier::YouPartner,
                Benefit::HraContribution,
            ),
            ("What is April out of pocket max for you and your family?", Month::April, Tier::YouFamily, Benefit::OutOfPocketMax),
            ("What is May network deductible for you and your family?", Month::May, Tier::YouFamily, Benefit::NetworkDeductible),
            ("What is June out of pocket max for you only?", Month::June, Tier::YouOnly, Benefit::OutOfPocketMax),
            ("What is July company HRA contribution for you only?", Month::July, Tier::YouOnly, Benefit::HraContribution),
            ("What is August Network Deductible for you and your child?", Month::August, Tier::YouChild, Benefit::NetworkDeductible),
            ("What is the deductible for you and your family in September?", Month::September, Tier::YouFamily, Benefit::NetworkDeductible),
            (
                "What is the out of pocket maximum for you and your partner in Oct?",
                Month::October,
                Tier::YouPartner,
                Benefit::OutOfPocketMax,
            ),
        ];
        for (q, m, t, b) in cases {
            assert_eq!(extract_facets(q), QueryFacets::full(m, t, b), "{q}");
        }
    }

    #[test]
    fn nothing_in_greeting() {
        assert!(extract_facets("hello").is_empty());
    }

    #[test]
    fn generated_sentence_mentions() {
        let m = facet_mentions("For March, the company HRA contribution for You + child(ren) is $83.00.");
        assert_eq!(m.months, BTreeSet::from([Month::March]));
        assert_eq!(m.tiers, BTreeSet::from([Tier::YouChild]));
        assert_eq!(m.benefits, BTreeSet::from([Benefit::HraContribution]));
        assert!(m.matches_exactly(&QueryFacets::full(Month::March, Tier::YouChild, Benefit::HraContribution)));
    }

    #[test]
    fn headers_map_to_their_tier() {
        for t in Tier::ALL {
            assert_eq!(facet_mentions(t.header()).tiers, BTreeSet::from([t]), "{t}");
        }
        for b in Benefit::ALL {
            assert_eq!(facet_mentions(b.caption()).benefits, BTreeSet::from([b]));
        }
    }

    #[test]
    fn csv_header_row_mentions_every_tier() {
        let m = facet_mentions("Month,You only,You + spouse,You + domestic partner,You + child(ren),You + family");
        assert_eq!(m.tiers.len(), 5);
        assert!(!m.matches_exactly(&QueryFacets { tier: Some(Tier::YouOnly), ..Default::default() }));
    }

    #[test]
    fn labels_round_trip() {
        for t in Tier::ALL {
            assert_eq!(t.label().parse::<Tier>().unwrap(), t);
        }
        for b in Benefit::ALL {
            assert_eq!(b.label().parse::<Benefit>().unwrap(), b);
        }
        for m in Month::ALL {
            assert_eq!(m.name().parse::<Month>().unwrap(), m);
            assert_eq!(Month::from_number(m.number()), Some(m));
        }
    }
}
