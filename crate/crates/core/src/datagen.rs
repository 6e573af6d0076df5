//! Seeded synthetic biography corpus with controllable divergence.
//!
//! Each instance is a table of up to six fields and one templated reference.
//! With probability `hallucination_rate` the reference gains a distractor
//! appositive right after the person's name, drawn from a vocabulary shared
//! with nothing else in the corpus; with probability `omission_rate` one
//! present field (never the name) is left out of the reference. Instance `i`
//! is a pure function of `(seed, i)`.

use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{save_dataset, tokenize, write_jsonl, Instance, Record, Table, Tokens};
use crate::error::{Error, Result};

pub const BIOGRAPHY: &str = "biography";

/// Probability that an optional field is present in a table.
pub const FIELD_PRESENCE: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceConfig {
    pub hallucination_rate: f64,
    pub omission_rate: f64,
    pub schema: String,
    pub count: usize,
    pub seed: u64,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        DivergenceConfig {
            hallucination_rate: 0.3,
            omission_rate: 0.1,
            schema: BIOGRAPHY.to_owned(),
            count: 1000,
            seed: 13,
        }
    }
}

impl DivergenceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("hallucination_rate", self.hallucination_rate),
            ("omission_rate", self.omission_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidArgument(format!("{name} = {rate} outside [0, 1]")));
            }
        }
        if self.schema != BIOGRAPHY {
            return Err(Error::InvalidArgument(format!("unknown schema `{}`", self.schema)));
        }
        Ok(())
    }
}

/// Where the reference departs from its table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub index: usize,
    /// Half-open token ranges `[start, end)` into the reference.
    pub hallucinated_spans: Vec<[usize; 2]>,
    pub omitted_attributes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub instance: Instance,
    pub annotation: Annotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Attr {
    Name,
    BirthDate,
    BirthPlace,
    Nationality,
    Occupation,
    AlmaMater,
}

impl Attr {
    const ALL: [Attr; 6] = [
        Attr::Name,
        Attr::BirthDate,
        Attr::BirthPlace,
        Attr::Nationality,
        Attr::Occupation,
        Attr::AlmaMater,
    ];

    fn key(self) -> &'static str {
        match self {
            Attr::Name => "name",
            Attr::BirthDate => "birth_date",
            Attr::BirthPlace => "birth_place",
            Attr::Nationality => "nationality",
            Attr::Occupation => "occupation",
            Attr::AlmaMater => "alma_mater",
        }
    }

    fn required(self) -> bool {
        matches!(self, Attr::Name | Attr::Occupation)
    }
}

const FIRST_NAMES: &[&str] = &[
    "adam", "alice", "amir", "anna", "bruno", "carla", "chen", "clara", "daniel", "diego", "elena", "emil", "fatima",
    "felix", "greta", "hana", "hugo", "ines", "ivan", "jonas", "julia", "karim", "laura", "leon", "lucia", "marco",
    "maria", "mateo", "nadia", "nils", "olga", "omar", "oscar", "paula", "pedro", "rosa", "ruben", "sara", "sofia",
    "stefan", "tariq", "tomas", "ulla", "vera", "viktor", "wen", "yara", "yusuf", "zoe", "lars",
];

const LAST_NAMES: &[&str] = &[
    "almeida", "berger", "castro", "dubois", "eriksen", "fischer", "garcia", "hansen", "ibrahim", "jansen", "kowalski",
    "larsen", "moreau", "nakamura", "novak", "okafor", "olsen", "petrov", "quinn", "rossi", "santos", "schmidt",
    "tanaka", "urban", "varga", "weber", "xu", "yilmaz", "zhang", "kim", "lopez", "meyer", "nielsen", "ortiz",
    "park", "reyes", "silva", "torres", "wagner", "bauer", "costa", "horvat", "ivanova", "jovanovic", "keller",
    "lindqvist", "mendes", "nowak", "popescu", "richter",
];

const MONTHS: &[&str] = &[
    "january", "february", "march", "april", "may", "june", "july", "august", "september", "october", "november",
    "december",
];

const CITIES: &[&str] = &[
    "lyon", "berlin", "munich", "rome", "milan", "madrid", "seville", "lisbon", "porto", "amsterdam", "brussels",
    "zurich", "vienna", "warsaw", "prague", "budapest", "stockholm", "oslo", "copenhagen", "helsinki", "dublin",
    "edinburgh", "cardiff", "london", "boston", "chicago", "toronto", "montreal", "lima", "bogota", "havana", "tokyo",
    "osaka", "kyoto", "beijing", "shanghai", "seoul", "mumbai", "delhi", "bangkok", "hanoi", "jakarta", "manila",
    "sydney", "melbourne", "cairo", "casablanca", "lagos", "nairobi", "athens",
];

const NATIONALITIES: &[&str] = &[
    "french", "german", "italian", "spanish", "portuguese", "dutch", "belgian", "swiss", "austrian", "polish",
    "czech", "hungarian", "swedish", "norwegian", "danish", "finnish", "irish", "scottish", "welsh", "english",
    "american", "canadian", "mexican", "brazilian", "argentine", "chilean", "peruvian", "colombian", "cuban",
    "japanese", "chinese", "korean", "indian", "pakistani", "thai", "vietnamese", "indonesian", "filipino",
    "australian", "egyptian", "moroccan", "nigerian", "kenyan", "ghanaian", "ethiopian", "turkish", "greek",
    "russian", "ukrainian", "israeli",
];

const OCCUPATIONS: &[&str] = &[
    "painter", "sculptor", "novelist", "poet", "journalist", "architect", "engineer", "physicist", "chemist",
    "biologist", "mathematician", "economist", "historian", "philosopher", "composer", "pianist", "violinist",
    "conductor", "singer", "actor", "director", "playwright", "photographer", "diplomat", "politician", "lawyer",
    "judge", "surgeon", "physician", "botanist", "astronomer", "geologist", "linguist", "anthropologist",
    "footballer", "cricketer", "cyclist", "swimmer", "boxer", "sprinter", "chef", "farmer", "banker",
    "entrepreneur", "inventor", "translator", "editor", "illustrator", "dancer", "choreographer",
];

const INSTITUTION_FORMS: &[(&str, &str)] = &[("university of", ""), ("", "polytechnic"), ("", "conservatory")];

const DISTRACTOR_OPENER: &str = ";";

const DISTRACTOR_ADVERBS: &[&str] = &[
    "famously", "reportedly", "secretly", "often", "briefly", "allegedly", "frequently", "privately", "notably",
    "occasionally",
];

const DISTRACTOR_VERBS: &[&str] = &[
    "collected", "restored", "rode", "sailed", "bred", "admired", "raced", "juggled", "sketched", "carved",
];

const DISTRACTOR_OBJECTS: &[&str] = &[
    "antique clocks", "racing pigeons", "vintage motorcycles", "rare orchids", "wooden boats", "stamps",
    "lighthouses", "marionettes", "kites", "bonsai trees",
];

#[derive(Debug, Clone, Copy)]
enum Piece {
    Lit(&'static str),
    Value,
}

use Piece::{Lit, Value};

struct Clause {
    attr: Option<Attr>,
    pieces: &'static [Piece],
}

const fn c(attr: Attr, pieces: &'static [Piece]) -> Clause {
    Clause { attr: Some(attr), pieces }
}

const fn lit(pieces: &'static [Piece]) -> Clause {
    Clause { attr: None, pieces }
}

const TEMPLATES: &[&[Clause]] = &[
    &[
        c(Attr::Name, &[Value]),
        c(Attr::BirthDate, &[Lit("( born"), Value, Lit(")")]),
        lit(&[Lit("is a")]),
        c(Attr::Nationality, &[Value]),
        c(Attr::Occupation, &[Value]),
        c(Attr::BirthPlace, &[Lit("from"), Value]),
        c(Attr::AlmaMater, &[Lit("who studied at"), Value]),
        lit(&[Lit(".")]),
    ],
    &[
        c(Attr::Name, &[Value]),
        lit(&[Lit("was a")]),
        c(Attr::Nationality, &[Value]),
        c(Attr::Occupation, &[Value]),
        c(Attr::BirthDate, &[Lit("born on"), Value]),
        c(Attr::BirthPlace, &[Lit("in"), Value]),
        c(Attr::AlmaMater, &[Lit(", an alumnus of the"), Value]),
        lit(&[Lit(".")]),
    ],
    &[
        c(Attr::BirthPlace, &[Lit("born in"), Value, Lit(",")]),
        c(Attr::Name, &[Value]),
        lit(&[Lit("is a")]),
        c(Attr::Nationality, &[Value]),
        c(Attr::Occupation, &[Value]),
        c(Attr::AlmaMater, &[Lit("educated at"), Value]),
        c(Attr::BirthDate, &[Lit(", born on"), Value]),
        lit(&[Lit(".")]),
    ],
    &[
        c(Attr::Occupation, &[Value]),
        c(Attr::Name, &[Value]),
        c(Attr::BirthDate, &[Lit("("), Value, Lit(")")]),
        c(Attr::Nationality, &[Lit("is a"), Value, Lit("citizen")]),
        c(Attr::BirthPlace, &[Lit("native to"), Value]),
        c(Attr::AlmaMater, &[Lit("and graduated from"), Value]),
        lit(&[Lit(".")]),
    ],
    &[
        c(Attr::Name, &[Value]),
        c(Attr::Nationality, &[Lit(", a"), Value, Lit("national ,")]),
        lit(&[Lit("works as a")]),
        c(Attr::Occupation, &[Value]),
        c(Attr::BirthDate, &[Lit(". born"), Value]),
        c(Attr::BirthPlace, &[Lit("in"), Value]),
        c(Attr::AlmaMater, &[Lit(", attended"), Value]),
        lit(&[Lit(".")]),
    ],
];

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [&'a str]) -> &'a str {
    items.choose(rng).expect("non-empty lexicon")
}

fn sample_value<R: Rng>(attr: Attr, rng: &mut R) -> String {
    match attr {
        Attr::Name => format!("{} {}", pick(rng, FIRST_NAMES), pick(rng, LAST_NAMES)),
        Attr::BirthDate => {
            let day = rng.random_range(1..=28);
            let month = pick(rng, MONTHS);
            let year = rng.random_range(1900..=1999);
            format!("{day} {month} {year}")
        }
        Attr::BirthPlace => pick(rng, CITIES).to_owned(),
        Attr::Nationality => pick(rng, NATIONALITIES).to_owned(),
        Attr::Occupation => pick(rng, OCCUPATIONS).to_owned(),
        Attr::AlmaMater => {
            let (prefix, suffix) = *INSTITUTION_FORMS.choose(rng).expect("non-empty");
            let city = pick(rng, CITIES);
            [prefix, city, suffix]
                .iter()
                .filter(|s| !s.is_empty())
                .copied()
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

/// An appositive such as `; famously collected stamps`.
fn distractor<R: Rng>(rng: &mut R) -> Tokens {
    let mut phrase = vec![
        DISTRACTOR_OPENER.to_owned(),
        pick(rng, DISTRACTOR_ADVERBS).to_owned(),
        pick(rng, DISTRACTOR_VERBS).to_owned(),
    ];
    phrase.extend(tokenize(pick(rng, DISTRACTOR_OBJECTS)));
    phrase
}

fn check_rates(config: &DivergenceConfig) -> Result<()> {
    config.validate()
}

/// The instance at `index`, with its divergence annotation.
pub fn generate_instance(config: &DivergenceConfig, index: usize) -> Result<GeneratedInstance> {
    check_rates(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);

    let mut values: Vec<(Attr, String)> = Vec::with_capacity(Attr::ALL.len());
    for attr in Attr::ALL {
        if attr.required() || rng.random_bool(FIELD_PRESENCE) {
            values.push((attr, sample_value(attr, &mut rng)));
        }
    }
    let template = TEMPLATES.choose(&mut rng).expect("templates");

    let mut omitted = Vec::new();
    if rng.random_bool(config.omission_rate) {
        let candidates: Vec<Attr> = values.iter().map(|(a, _)| *a).filter(|a| *a != Attr::Name).collect();
        if let Some(&attr) = candidates.choose(&mut rng) {
            omitted.push(attr);
        }
    }

    let mut clauses: Vec<Tokens> = Vec::new();
    let mut name_slot = 0;
    for clause in template.iter() {
        if clause.attr == Some(Attr::Name) {
            name_slot = clauses.len();
        }
        let value = match clause.attr {
            Some(attr) => match values.iter().find(|(a, _)| *a == attr) {
                Some((_, v)) if !omitted.contains(&attr) => Some(v.as_str()),
                _ => continue,
            },
            None => None,
        };
        let mut tokens = Vec::new();
        for piece in clause.pieces {
            match piece {
                Lit(text) => tokens.extend(tokenize(text)),
                Value => tokens.extend(tokenize(value.expect("value clause"))),
            }
        }
        clauses.push(tokens);
    }

    let mut spans = Vec::new();
    if rng.random_bool(config.hallucination_rate) {
        let slot = name_slot;
        let phrase = distractor(&mut rng);
        let start: usize = clauses[..=slot].iter().map(Vec::len).sum();
        spans.push([start, start + phrase.len()]);
        clauses.insert(slot + 1, phrase);
    }
    let reference: Tokens = clauses.into_iter().flatten().collect();

    let records = values
        .iter()
        .map(|(attr, v)| Record::new(attr.key(), v.clone()))
        .collect::<Result<Vec<_>>>()?;
    let instance = Instance::new(Table::new(records)?, vec![reference])?;
    Ok(GeneratedInstance {
        instance,
        annotation: Annotation {
            index,
            hallucinated_spans: spans,
            omitted_attributes: omitted.iter().map(|a| a.key().to_owned()).collect(),
        },
    })
}

/// Instances and annotations of one split, aligned by position.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitData {
    pub instances: Vec<Instance>,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDataset {
    pub train: SplitData,
    pub dev: SplitData,
    pub test: SplitData,
}

/// Sizes of the 80/10/10 split of `count` instances.
pub fn split_sizes(count: usize) -> (usize, usize, usize) {
    let train = count * 8 / 10;
    let dev = count / 10;
    (train, dev, count - train - dev)
}

/// All `count` instances, split by index range into train, dev and test.
pub fn generate_dataset(config: &DivergenceConfig) -> Result<GeneratedDataset> {
    check_rates(config)?;
    if config.count < 10 {
        return Err(Error::InvalidArgument(format!("count {} is below the minimum of 10", config.count)));
    }
    let (n_train, n_dev, _) = split_sizes(config.count);
    let mut splits = [SplitData::default(), SplitData::default(), SplitData::default()];
    for index in 0..config.count {
        let generated = generate_instance(config, index)?;
        let split = if index < n_train {
            0
        } else if index < n_train + n_dev {
            1
        } else {
            2
        };
        splits[split].instances.push(generated.instance);
        splits[split].annotations.push(generated.annotation);
    }
    let [train, dev, test] = splits;
    Ok(GeneratedDataset { train, dev, test })
}

/// Writes `{split}.jsonl` and `{split}.annotations.jsonl` for each split.
pub fn write_dataset(dataset: &GeneratedDataset, dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, split) in [("train", &dataset.train), ("dev", &dataset.dev), ("test", &dataset.test)] {
        let data = dir.join(format!("{name}.jsonl"));
        save_dataset(&split.instances, &data)?;
        let notes = dir.join(format!("{name}.annotations.jsonl"));
        write_jsonl(&split.annotations, &notes)?;
        written.push(data);
        written.push(notes);
    }
    Ok(written)
}

/// Every literal word the templates can emit.
pub fn template_vocabulary() -> Vec<String> {
    let mut words: Vec<String> = TEMPLATES
        .iter()
        .flat_map(|t| t.iter())
        .flat_map(|clause| clause.pieces.iter())
        .filter_map(|p| match p {
            Lit(text) => Some(tokenize(text)),
            Value => None,
        })
        .flatten()
        .collect();
    words.sort();
    words.dedup();
    words
}

/// Every word a distractor phrase can contain.
pub fn distractor_vocabulary() -> Vec<String> {
    let mut words: Vec<String> = [DISTRACTOR_OPENER]
        .iter()
        .chain(DISTRACTOR_ADVERBS)
        .chain(DISTRACTOR_VERBS)
        .chain(DISTRACTOR_OBJECTS)
        .flat_map(|s| tokenize(s))
        .collect();
    words.sort();
    words.dedup();
    words
}

/// Every word a field value or attribute name can contain.
pub fn field_vocabulary() -> Vec<String> {
    let mut words: Vec<String> = [FIRST_NAMES, LAST_NAMES, MONTHS, CITIES, NATIONALITIES, OCCUPATIONS]
        .iter()
        .flat_map(|lex| lex.iter())
        .chain(INSTITUTION_FORMS.iter().flat_map(|(p, s)| [p, s]))
        .flat_map(|s| tokenize(s))
        .chain(Attr::ALL.iter().flat_map(|a| crate::corpus::attribute_tokens(a.key())))
        .chain((1..=28).map(|d: u32| d.to_string()))
        .chain((1900..=1999).map(|y: u32| y.to_string()))
        .collect();
    words.sort();
    words.dedup();
    words
}
