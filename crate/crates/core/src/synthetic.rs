//! A deterministic generator of short English-like sentence pairs in the
//! tab-delimited `English<TAB>translation` layout of the Tatoeba exports.
//!
//! Sentences come from a small phrase-structure grammar with Zipf-weighted
//! word choice, so the corpus has a long-tailed vocabulary, lengths from 1
//! to about 25 tokens and plenty of repeated bigrams. The right column is a
//! made-up language produced by a fixed word-level transformation, which is
//! enough to exercise the right-column code path.

use crate::numerics::rng::{tag, Rng};

const PRONOUNS: &[(&str, &str, bool)] = &[
    ("i", "me", false),
    ("you", "you", false),
    ("he", "him", true),
    ("she", "her", true),
    ("we", "us", false),
    ("they", "them", false),
    ("it", "it", true),
];

const NAMES: &[&str] = &[
    "tom", "mary", "john", "alice", "ken", "emily", "jack", "sarah", "paul", "lucy", "mike", "anna", "peter", "kate",
    "david", "laura", "george", "nancy", "frank", "helen", "oscar", "irene", "victor", "wendy", "yuki", "boris",
    "carmen", "dmitri", "esther", "felix",
];

const NOUNS: &[&str] = &[
    "book",
    "dog",
    "house",
    "car",
    "cat",
    "friend",
    "teacher",
    "door",
    "letter",
    "money",
    "room",
    "school",
    "city",
    "train",
    "phone",
    "child",
    "window",
    "table",
    "job",
    "problem",
    "question",
    "story",
    "song",
    "river",
    "tree",
    "garden",
    "picture",
    "key",
    "bag",
    "coat",
    "shirt",
    "bike",
    "boat",
    "computer",
    "doctor",
    "student",
    "party",
    "game",
    "movie",
    "meal",
    "bottle",
    "cup",
    "apple",
    "bread",
    "chair",
    "bed",
    "street",
    "park",
    "store",
    "office",
    "plan",
    "answer",
    "idea",
    "mistake",
    "machine",
    "horse",
    "bird",
    "fish",
    "box",
    "clock",
    "camera",
    "ticket",
    "map",
    "road",
    "bridge",
    "hill",
    "lake",
    "island",
    "village",
    "country",
    "language",
    "word",
    "name",
    "song",
    "voice",
    "face",
    "hand",
    "heart",
    "brother",
    "sister",
    "mother",
    "father",
    "uncle",
    "neighbor",
    "boss",
    "guest",
    "stranger",
    "painting",
    "museum",
    "library",
    "hospital",
    "restaurant",
    "kitchen",
    "hotel",
    "airport",
    "station",
    "church",
    "market",
    "farm",
    "forest",
    "beach",
    "mountain",
    "desert",
    "castle",
    "tower",
    "wall",
    "roof",
    "floor",
    "stairs",
    "umbrella",
    "hat",
    "shoe",
    "glove",
    "wallet",
    "watch",
    "ring",
    "necklace",
    "newspaper",
    "magazine",
    "novel",
    "poem",
    "recipe",
    "cake",
    "soup",
    "salad",
    "sandwich",
    "cheese",
    "egg",
    "orange",
    "banana",
    "lemon",
    "tomato",
    "potato",
    "onion",
    "carrot",
    "pencil",
    "notebook",
    "envelope",
    "stamp",
    "package",
    "gift",
    "toy",
    "puzzle",
    "violin",
    "piano",
    "guitar",
    "drum",
    "trumpet",
    "lamp",
    "candle",
    "mirror",
    "pillow",
    "blanket",
    "towel",
    "sofa",
    "carpet",
    "curtain",
    "fence",
    "gate",
    "ladder",
    "hammer",
    "nail",
    "rope",
    "bucket",
    "basket",
    "knife",
    "spoon",
    "fork",
    "plate",
    "bowl",
    "kettle",
    "oven",
    "fridge",
    "engine",
    "wheel",
    "tire",
    "helmet",
    "tent",
    "compass",
    "telescope",
    "microscope",
    "robot",
    "rocket",
    "planet",
    "star",
    "moon",
    "cloud",
    "storm",
    "rainbow",
    "volcano",
    "glacier",
    "canyon",
    "meadow",
    "orchard",
    "vineyard",
    "harbor",
    "lighthouse",
    "cathedral",
    "palace",
    "dungeon",
    "labyrinth",
    "treasure",
    "secret",
    "rumor",
    "promise",
    "contract",
    "invoice",
    "receipt",
    "passport",
    "visa",
    "suitcase",
    "backpack",
    "journal",
    "diary",
    "calendar",
    "schedule",
    "deadline",
    "meeting",
    "lecture",
    "exam",
    "essay",
    "thesis",
    "experiment",
    "theory",
    "formula",
    "equation",
    "algorithm",
    "spreadsheet",
    "printer",
    "keyboard",
    "monitor",
    "cable",
    "battery",
    "charger",
    "antenna",
    "satellite",
    "submarine",
    "helicopter",
    "parachute",
    "skateboard",
    "snowboard",
    "kayak",
    "canoe",
    "sailboat",
    "tractor",
    "bulldozer",
    "crane",
    "elevator",
    "escalator",
    "tunnel",
    "highway",
    "intersection",
    "pavement",
    "sidewalk",
    "pharmacy",
    "bakery",
    "butcher",
    "florist",
    "jeweler",
    "tailor",
    "plumber",
    "carpenter",
    "electrician",
    "mechanic",
    "pilot",
    "sailor",
    "soldier",
    "farmer",
    "fisherman",
    "hunter",
    "shepherd",
    "monk",
    "nun",
    "priest",
    "king",
    "queen",
    "prince",
    "princess",
    "knight",
    "wizard",
    "witch",
    "giant",
    "dwarf",
    "dragon",
    "unicorn",
    "mermaid",
    "ghost",
    "vampire",
    "zombie",
    "penguin",
    "giraffe",
    "elephant",
    "kangaroo",
    "koala",
    "panda",
    "tiger",
    "lion",
    "wolf",
    "fox",
    "rabbit",
    "squirrel",
    "hedgehog",
    "owl",
    "eagle",
    "parrot",
    "pigeon",
    "swan",
    "duck",
    "goose",
    "turtle",
    "frog",
    "snake",
    "lizard",
    "spider",
    "butterfly",
    "bee",
    "ant",
    "mosquito",
    "whale",
    "dolphin",
    "shark",
    "octopus",
    "lobster",
];

const ADJECTIVES: &[&str] = &[
    "good",
    "new",
    "old",
    "big",
    "small",
    "red",
    "long",
    "young",
    "nice",
    "little",
    "beautiful",
    "happy",
    "strange",
    "important",
    "expensive",
    "cheap",
    "easy",
    "difficult",
    "heavy",
    "light",
    "dark",
    "quiet",
    "noisy",
    "clean",
    "dirty",
    "empty",
    "full",
    "warm",
    "cold",
    "hot",
    "green",
    "blue",
    "yellow",
    "white",
    "black",
    "brown",
    "famous",
    "funny",
    "serious",
    "careful",
    "lazy",
    "busy",
    "tired",
    "hungry",
    "angry",
    "brave",
    "shy",
    "polite",
    "rude",
    "clever",
    "foolish",
    "ancient",
    "modern",
    "wooden",
    "broken",
    "shiny",
    "rusty",
    "fragile",
    "enormous",
    "tiny",
    "delicious",
    "bitter",
    "sour",
    "salty",
    "fragrant",
    "mysterious",
    "suspicious",
    "generous",
    "stubborn",
    "curious",
    "elegant",
    "clumsy",
    "gentle",
    "fierce",
    "loyal",
    "jealous",
    "nervous",
    "patient",
    "humble",
    "proud",
];

/// Base form, third person singular, past tense.
const VERBS: &[(&str, &str, &str)] = &[
    ("like", "likes", "liked"),
    ("see", "sees", "saw"),
    ("want", "wants", "wanted"),
    ("need", "needs", "needed"),
    ("have", "has", "had"),
    ("know", "knows", "knew"),
    ("find", "finds", "found"),
    ("buy", "buys", "bought"),
    ("make", "makes", "made"),
    ("take", "takes", "took"),
    ("read", "reads", "read"),
    ("love", "loves", "loved"),
    ("open", "opens", "opened"),
    ("close", "closes", "closed"),
    ("help", "helps", "helped"),
    ("call", "calls", "called"),
    ("visit", "visits", "visited"),
    ("watch", "watches", "watched"),
    ("sell", "sells", "sold"),
    ("bring", "brings", "brought"),
    ("lose", "loses", "lost"),
    ("forget", "forgets", "forgot"),
    ("remember", "remembers", "remembered"),
    ("wash", "washes", "washed"),
    ("paint", "paints", "painted"),
    ("fix", "fixes", "fixed"),
    ("break", "breaks", "broke"),
    ("carry", "carries", "carried"),
    ("follow", "follows", "followed"),
    ("hide", "hides", "hid"),
    ("build", "builds", "built"),
    ("draw", "draws", "drew"),
    ("keep", "keeps", "kept"),
    ("send", "sends", "sent"),
    ("write", "writes", "wrote"),
    ("borrow", "borrows", "borrowed"),
    ("cook", "cooks", "cooked"),
    ("clean", "cleans", "cleaned"),
    ("order", "orders", "ordered"),
    ("check", "checks", "checked"),
    ("describe", "describes", "described"),
    ("admire", "admires", "admired"),
    ("ignore", "ignores", "ignored"),
    ("photograph", "photographs", "photographed"),
    ("deliver", "delivers", "delivered"),
    ("inspect", "inspects", "inspected"),
    ("rescue", "rescues", "rescued"),
    ("polish", "polishes", "polished"),
    ("measure", "measures", "measured"),
    ("decorate", "decorates", "decorated"),
];

/// Intransitive: base, third person singular, past tense.
const INTRANSITIVE: &[(&str, &str, &str)] = &[
    ("run", "runs", "ran"),
    ("sleep", "sleeps", "slept"),
    ("laugh", "laughs", "laughed"),
    ("cry", "cries", "cried"),
    ("swim", "swims", "swam"),
    ("wait", "waits", "waited"),
    ("work", "works", "worked"),
    ("sing", "sings", "sang"),
    ("dance", "dances", "danced"),
    ("leave", "leaves", "left"),
    ("arrive", "arrives", "arrived"),
    ("smile", "smiles", "smiled"),
    ("travel", "travels", "traveled"),
    ("study", "studies", "studied"),
    ("shout", "shouts", "shouted"),
    ("whisper", "whispers", "whispered"),
    ("hesitate", "hesitates", "hesitated"),
    ("complain", "complains", "complained"),
];

const PREPOSITIONS: &[&str] =
    &["in", "on", "near", "behind", "under", "at", "from", "to", "with", "without", "beside", "above", "across"];
const ADVERBS: &[&str] = &[
    "today",
    "yesterday",
    "now",
    "again",
    "quickly",
    "slowly",
    "often",
    "never",
    "always",
    "sometimes",
    "later",
    "early",
    "carefully",
    "tomorrow",
    "together",
    "alone",
    "suddenly",
    "finally",
    "quietly",
    "happily",
];
const MODALS: &[&str] = &["can", "will", "should", "must", "might", "could", "would"];
const CONJUNCTIONS: &[&str] = &["and", "but", "because", "so", "when", "although", "if"];
const INTERJECTIONS: &[&str] = &["hello", "thanks", "help", "wait", "sorry", "goodbye", "cheers", "really", "stop"];
const QUESTION_WORDS: &[&str] = &["what", "where", "why", "when", "how"];

/// Index drawn with probability proportional to `1 / (i + 1)^s`.
fn zipf(rng: &mut Rng, n: usize, s: f64) -> usize {
    let total: f64 = (1..=n).map(|k| (k as f64).powf(-s)).sum();
    let mut x = rng.next_f64() * total;
    for k in 0..n {
        x -= ((k + 1) as f64).powf(-s);
        if x < 0.0 {
            return k;
        }
    }
    n - 1
}

fn pick<'a>(rng: &mut Rng, items: &'a [&'a str]) -> &'a str {
    items[zipf(rng, items.len(), 1.05)]
}

struct Subject {
    words: Vec<String>,
    third_singular: bool,
}

struct Builder<'r> {
    rng: &'r mut Rng,
}

impl Builder<'_> {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.bernoulli(p)
    }

    fn noun_phrase(&mut self) -> Vec<String> {
        let mut w = vec![if self.chance(0.6) { "the" } else { "a" }.to_string()];
        if self.chance(0.35) {
            w.push(pick(self.rng, ADJECTIVES).into());
        }
        w.push(pick(self.rng, NOUNS).into());
        if w[0] == "a" && w[1].starts_with(['a', 'e', 'i', 'o', 'u']) {
            w[0] = "an".into();
        }
        w
    }

    fn subject(&mut self) -> Subject {
        let r = self.rng.next_f64();
        if r < 0.45 {
            let (p, _, third) = PRONOUNS[zipf(self.rng, PRONOUNS.len(), 0.8)];
            Subject { words: vec![p.into()], third_singular: third }
        } else if r < 0.7 {
            Subject { words: vec![pick(self.rng, NAMES).into()], third_singular: true }
        } else {
            Subject { words: self.noun_phrase(), third_singular: true }
        }
    }

    fn object(&mut self) -> Vec<String> {
        let r = self.rng.next_f64();
        if r < 0.25 {
            vec![PRONOUNS[zipf(self.rng, PRONOUNS.len(), 0.8)].1.into()]
        } else if r < 0.4 {
            vec![pick(self.rng, NAMES).into()]
        } else {
            self.noun_phrase()
        }
    }

    fn verb_group(&mut self, subject: &Subject, forms: (&str, &str, &str)) -> Vec<String> {
        let (base, third, past) = forms;
        let r = self.rng.next_f64();
        if r < 0.4 {
            vec![past.into()]
        } else if r < 0.65 {
            let mut v = vec![pick(self.rng, MODALS).to_string()];
            if self.chance(0.25) {
                v.push("not".into());
            }
            v.push(base.into());
            v
        } else if self.chance(0.2) {
            let aux = if subject.third_singular { "doesn't" } else { "don't" };
            vec![aux.into(), base.into()]
        } else {
            vec![if subject.third_singular { third } else { base }.into()]
        }
    }

    fn clause(&mut self) -> Vec<String> {
        let subject = self.subject();
        let mut w = subject.words.clone();
        if self.chance(0.75) {
            let forms = VERBS[zipf(self.rng, VERBS.len(), 0.9)];
            w.extend(self.verb_group(&subject, forms));
            w.extend(self.object());
        } else {
            let forms = INTRANSITIVE[zipf(self.rng, INTRANSITIVE.len(), 0.9)];
            w.extend(self.verb_group(&subject, forms));
        }
        if self.chance(0.35) {
            w.push(pick(self.rng, PREPOSITIONS).into());
            w.extend(self.noun_phrase());
        }
        if self.chance(0.3) {
            w.push(pick(self.rng, ADVERBS).into());
        }
        w
    }

    fn sentence(&mut self) -> String {
        let r = self.rng.next_f64();
        let mut words: Vec<String>;
        let end;
        if r < 0.05 {
            words = vec![pick(self.rng, INTERJECTIONS).into()];
            end = if self.chance(0.5) { "!" } else { "." };
        } else if r < 0.13 {
            let forms = VERBS[zipf(self.rng, VERBS.len(), 0.9)];
            words = vec![forms.0.into()];
            words.extend(self.object());
            if self.chance(0.4) {
                words.push(pick(self.rng, ADVERBS).into());
            }
            end = if self.chance(0.5) { "!" } else { "." };
        } else if r < 0.28 {
            let subject = self.subject();
            let forms = VERBS[zipf(self.rng, VERBS.len(), 0.9)];
            words = if self.chance(0.5) { vec![pick(self.rng, QUESTION_WORDS).into()] } else { Vec::new() };
            words.push(if subject.third_singular { "does" } else { "do" }.into());
            words.extend(subject.words);
            words.push(forms.0.into());
            if words[0] != "what" {
                words.extend(self.object());
            }
            end = "?";
        } else {
            words = self.clause();
            while self.chance(0.28) && words.len() < 18 {
                if self.chance(0.3) {
                    words.push(",".into());
                }
                words.push(pick(self.rng, CONJUNCTIONS).into());
                words.extend(self.clause());
            }
            end = ".";
        }
        let mut text = String::new();
        for (i, w) in words.iter().enumerate() {
            if i > 0 && w != "," {
                text.push(' ');
            }
            if i == 0 || NAMES.contains(&w.as_str()) || w == "i" {
                let mut c = w.chars();
                if let Some(f) = c.next() {
                    text.extend(f.to_uppercase());
                    text.push_str(c.as_str());
                }
            } else {
                text.push_str(w);
            }
        }
        text.push_str(end);
        text
    }
}

/// Word-level transformation into the made-up right-column language.
fn translate_word(word: &str) -> String {
    const SYLLABLES: &[&str] = &["ka", "lo", "mi", "nu", "re", "sa", "to", "vi", "zo", "ek", "ul", "ar"];
    let h = tag(word);
    let len = 1 + (h % 3) as usize;
    (0..len).map(|k| SYLLABLES[((h >> (8 * (k + 1))) % SYLLABLES.len() as u64) as usize]).collect()
}

fn translate(text: &str) -> String {
    let mut out = String::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        if !word.is_empty() {
            out.push_str(&translate_word(&word.to_lowercase()));
            word.clear();
        }
    };
    for c in text.chars() {
        if c.is_alphanumeric() || c == '\'' {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

/// `count` tab-separated pairs, one per line, fully determined by `seed`.
pub fn generate_pairs(seed: u64, count: usize) -> Vec<String> {
    let mut rng = Rng::stream(seed, tag("synthetic-corpus"));
    let mut b = Builder { rng: &mut rng };
    (0..count)
        .map(|_| {
            let en = b.sentence();
            let other = translate(&en);
            format!("{en}\t{other}")
        })
        .collect()
}
