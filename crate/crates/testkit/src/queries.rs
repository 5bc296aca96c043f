//! Random queries drawn from a corpus, so most of them match something.

use donut_core::bib::BibEntry;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::synth::{TAG_POOL, WORDS};

fn words_of(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == '.')
        .filter(|w| !w.is_empty() && !w.contains(['"', ':', '{', '}', '\\']))
        .map(str::to_string)
        .collect()
}

fn typo<R: Rng>(rng: &mut R, word: &str) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    if chars.len() < 4 {
        return word.to_string();
    }
    let i = rng.gen_range(1..chars.len() - 1);
    match rng.gen_range(0..3) {
        0 => {
            chars.remove(i);
        }
        1 => chars.swap(i, i + 1),
        _ => chars.insert(i, 'e'),
    }
    chars.into_iter().collect()
}

fn clause<R: Rng>(rng: &mut R, entry: &BibEntry) -> String {
    let title = entry.title().map(words_of).unwrap_or_default();
    let abs = entry.field("abstract").map(words_of).unwrap_or_default();
    let pick = |rng: &mut R, ws: &[String]| ws.choose(rng).cloned().unwrap_or_else(|| "graph".into());
    let phrase = |rng: &mut R, ws: &[String]| {
        if ws.len() < 2 {
            return pick(rng, ws);
        }
        let n = rng.gen_range(2..=ws.len().min(3));
        let s = rng.gen_range(0..=ws.len() - n);
        ws[s..s + n].join(" ")
    };
    match rng.gen_range(0..12) {
        0 => pick(rng, &title),
        1 => format!("title:{}", pick(rng, &title)),
        2 => format!("\"{}\"", phrase(rng, &title)),
        3 => format!("title:\"{}\"", phrase(rng, &title)),
        4 => format!("abstract:{}", pick(rng, &abs)),
        5 => format!("\"{}\"", phrase(rng, &abs)),
        6 => {
            let name = entry.authors().first().map(|a| a.split(',').next().unwrap_or(a).to_string());
            format!("author:{}", name.unwrap_or_else(|| "smith".into()).replace(' ', ""))
        }
        7 => match entry.year() {
            Some(y) if rng.gen_bool(0.5) => format!("year:{y}"),
            Some(y) => y.to_string(),
            None => "year:2000".into(),
        },
        8 => {
            let tag = TAG_POOL.choose(rng).expect("nonempty");
            let parts: Vec<&str> = tag.split(':').collect();
            let start = rng.gen_range(0..parts.len());
            let value = parts[start..].join(":");
            if value.contains(' ') {
                format!("tag:\"{value}\"")
            } else {
                format!("tag:{value}")
            }
        }
        9 => WORDS.choose(rng).expect("nonempty").to_string(),
        10 => {
            let w = pick(rng, &title);
            typo(rng, &w)
        }
        _ => match entry.doi() {
            Some(d) => format!("doi:{d}"),
            None => format!("venue:{}", entry.field("journal").or(entry.field("booktitle")).map(words_of).unwrap_or_default().first().cloned().unwrap_or_default()),
        },
    }
}

/// A query of one to three clauses, mostly built from one entry's own text.
pub fn random_query<R: Rng>(rng: &mut R, corpus: &[BibEntry]) -> String {
    let n = rng.gen_range(1..=3);
    let anchor = corpus.choose(rng).expect("corpus is not empty");
    let clauses: Vec<String> = (0..n)
        .map(|_| {
            let e = if rng.gen_bool(0.8) { anchor } else { corpus.choose(rng).expect("corpus is not empty") };
            clause(rng, e)
        })
        .filter(|c| !c.trim().is_empty() && c != "venue:")
        .collect();
    if clauses.is_empty() {
        "graph".into()
    } else {
        clauses.join(" ")
    }
}
