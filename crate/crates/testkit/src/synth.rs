//! Seeded synthetic corpora.

use donut_core::bib::BibEntry;
use donut_core::taxonomy::{parse_tag, Flavor};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WORDS: [&str; 96] = [
    "persistent", "homology", "topological", "data", "analysis", "mapper", "graph", "network", "brain", "signal",
    "time", "series", "point", "cloud", "image", "shape", "protein", "structure", "filtration", "barcode",
    "diagram", "landscape", "kernel", "stability", "complex", "simplicial", "vietoris", "rips", "cech", "alpha",
    "betti", "number", "euler", "characteristic", "manifold", "learning", "neural", "deep", "classification", "clustering",
    "feature", "extraction", "cancer", "tumour", "cell", "gene", "expression", "molecule", "material", "crystal",
    "fluid", "flow", "climate", "weather", "finance", "market", "sensor", "robot", "motion", "path",
    "text", "language", "music", "audio", "video", "traffic", "city", "epidemic", "disease", "diagnosis",
    "heart", "lung", "retina", "bone", "fracture", "porous", "granular", "polymer", "glass", "foam",
    "galaxy", "cosmic", "web", "stream", "sheaf", "cohomology", "zigzag", "multiparameter", "vectorization", "distance",
    "bottleneck", "wasserstein", "sampling", "noise", "robust", "general",
];

pub const AUTHORS: [&str; 24] = [
    "Dłotko, Paweł", "Kovács, Anna", "Müller, Jürgen", "Nguyễn, Văn", "Ødegaard, Siri", "Şahin, Emre",
    "Smith, John", "Garcia, Maria", "Chen, Wei", "Rossi, Luca", "Novak, Petra", "Okafor, Chidi",
    "Lindqvist, Åsa", "Dubois, Hélène", "Kowalski, Jan", "Tanaka, Yuki", "Ivanova, Olga", "Haddad, Omar",
    "Silva, João", "Brown, Emily", "Fischer, Lena", "Papadopoulos, Nikos", "Singh, Arjun", "Wright, Sam",
];

pub const VENUES: [&str; 8] = [
    "Journal of Applied and Computational Topology",
    "Scientific Reports",
    "Physical Review E",
    "Bioinformatics",
    "Nature Communications",
    "Proceedings of the International Conference on Machine Learning",
    "IEEE Transactions on Visualization and Computer Graphics",
    "Journal of Mathematical Imaging and Vision",
];

pub const TAG_POOL: [&str; 24] = [
    "area:medicine",
    "area:medicine:neurology",
    "area:medicine:neurology:epilepsy",
    "area:medicine:oncology",
    "area:materials science",
    "area:biology:proteins",
    "area:finance",
    "area:astronomy",
    "tool:persistent homology",
    "tool:persistent homology:vietoris-rips",
    "tool:mapper",
    "tool:graphs",
    "tool:graphs:directed",
    "tool:euler characteristic",
    "tool:persistence landscapes",
    "tool:zigzag persistence",
    "input:point cloud",
    "input:time series",
    "input:images",
    "input:images:3d",
    "input:graphs",
    "input:text",
    "input:scalar field",
    "input:distance matrix",
];

/// A Zipf-like pick: early words are much more frequent.
fn word(rng: &mut ChaCha8Rng, extra_vocab: usize) -> String {
    let total = WORDS.len() + extra_vocab;
    let r: f64 = rng.gen();
    let i = ((total as f64).powf(r) - 1.0) as usize;
    match WORDS.get(i) {
        Some(w) => w.to_string(),
        None => pseudo_word(i - WORDS.len()),
    }
}

/// Deterministic pronounceable filler word number `i`.
pub fn pseudo_word(mut i: usize) -> String {
    const C: &[u8] = b"bdfgklmnprstvz";
    const V: &[u8] = b"aeiou";
    let mut s = String::new();
    loop {
        s.push(C[i % C.len()] as char);
        i /= C.len();
        s.push(V[i % V.len()] as char);
        i /= V.len();
        if i == 0 {
            break;
        }
    }
    s.push('x');
    s
}

fn sentence(rng: &mut ChaCha8Rng, min: usize, max: usize, extra_vocab: usize) -> String {
    let n = rng.gen_range(min..=max);
    let mut words: Vec<String> = (0..n).map(|_| word(rng, extra_vocab)).collect();
    if rng.gen_bool(0.15) && words.len() > 1 {
        // a hyphenated compound now and then
        let i = rng.gen_range(0..words.len() - 1);
        let joined = format!("{}-{}", words[i], words[i + 1]);
        words.splice(i..i + 2, [joined]);
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get(..1) {
        s = first.to_uppercase() + &s[1..];
    }
    s
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub entries: usize,
    pub seed: u64,
    /// Filler words beyond the topical list; larger corpora want more.
    pub extra_vocab: usize,
    pub with_abstracts: bool,
    /// Exact number of entries carrying the innovate flavor; random when
    /// `None`.
    pub innovate: Option<usize>,
}

impl SynthConfig {
    pub fn new(entries: usize, seed: u64) -> Self {
        SynthConfig {
            entries,
            seed,
            extra_vocab: entries.min(5_000),
            with_abstracts: true,
            innovate: None,
        }
    }
}

/// Admissible entries (one tag of every class, valid years and keys).
pub fn synth_corpus(config: &SynthConfig) -> Vec<BibEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let innovate_slots: Vec<bool> = match config.innovate {
        Some(k) => {
            let mut v: Vec<bool> = (0..config.entries).map(|i| i < k).collect();
            v.shuffle(&mut rng);
            v
        }
        None => (0..config.entries).map(|_| rng.gen_bool(0.15)).collect(),
    };
    (0..config.entries)
        .map(|i| {
            let mut e = BibEntry::new(if rng.gen_bool(0.8) { "article" } else { "inproceedings" }, format!("e{i:05}"));
            e.set_field("title", sentence(&mut rng, 3, 10, config.extra_vocab));
            let n_auth = rng.gen_range(1..=3);
            let authors: Vec<&str> = AUTHORS.choose_multiple(&mut rng, n_auth).copied().collect();
            e.set_field("author", authors.join(" and "));
            e.set_field("year", rng.gen_range(1998..=2023).to_string());
            let venue = *VENUES.choose(&mut rng).expect("nonempty");
            e.set_field(if e.entry_type == "article" { "journal" } else { "booktitle" }, venue);
            if rng.gen_bool(0.7) {
                e.set_field("doi", format!("10.{}/synth.{i}", rng.gen_range(1000..9999)));
            }
            if config.with_abstracts && rng.gen_bool(0.8) {
                e.set_field("abstract", sentence(&mut rng, 15, 50, config.extra_vocab));
            }
            for class in ["area", "tool", "input"] {
                let pool: Vec<&str> = TAG_POOL.iter().copied().filter(|t| t.starts_with(class)).collect();
                let k = rng.gen_range(1..=2);
                for t in pool.choose_multiple(&mut rng, k) {
                    e.tags.insert(parse_tag(t).expect("pool tags parse"));
                }
            }
            if innovate_slots[i] {
                e.flavors.insert(Flavor::Innovate);
            }
            if rng.gen_bool(0.3) {
                e.flavors.insert(Flavor::Confirm);
            }
            e
        })
        .collect()
}

/// The 431-entry corpus with exactly 58 innovate entries.
pub fn corpus_431() -> Vec<BibEntry> {
    synth_corpus(&SynthConfig {
        innovate: Some(58),
        ..SynthConfig::new(431, 431)
    })
}
