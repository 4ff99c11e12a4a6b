//! Naive reference semantics: walks the raw s-expressions of a domain and
//! problem with exact rational arithmetic. Shares no code with the library's
//! parser, grounder or environment.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum Sx {
    Sym(String),
    List(Vec<Sx>),
}

impl Sx {
    fn list(&self) -> &[Sx] {
        match self {
            Sx::List(v) => v,
            Sx::Sym(s) => panic!("expected a list, got {s}"),
        }
    }

    fn sym(&self) -> Option<&str> {
        match self {
            Sx::Sym(s) => Some(s),
            Sx::List(_) => None,
        }
    }
}

pub fn read(text: &str) -> Sx {
    let mut tokens = Vec::new();
    for line in text.lines() {
        let line = line.split(';').next().unwrap_or("").to_lowercase();
        let spaced = line.replace('(', " ( ").replace(')', " ) ");
        tokens.extend(spaced.split_whitespace().map(str::to_string));
    }
    let mut pos = 0;
    let sx = read_at(&tokens, &mut pos);
    assert_eq!(pos, tokens.len(), "trailing tokens");
    sx
}

fn read_at(tokens: &[String], pos: &mut usize) -> Sx {
    let t = &tokens[*pos];
    *pos += 1;
    if t == "(" {
        let mut items = Vec::new();
        while tokens[*pos] != ")" {
            items.push(read_at(tokens, pos));
        }
        *pos += 1;
        Sx::List(items)
    } else {
        Sx::Sym(t.clone())
    }
}

pub fn number(text: &str) -> Option<BigRational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, scale);
    Some(if neg { -r } else { r })
}

/// `a b - t c - u d` into (name, type) pairs; untyped names are objects.
fn typed_list(items: &[Sx]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut pending = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let s = items[i].sym().expect("symbol in typed list");
        if s == "-" {
            let t = items[i + 1].sym().expect("type name").to_string();
            for p in pending.drain(..) {
                out.push((p, t.clone()));
            }
            i += 2;
        } else {
            pending.push(s.to_string());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|p| (p, "object".to_string())));
    out
}

fn section<'a>(def: &'a [Sx], key: &str) -> Option<&'a [Sx]> {
    def.iter().filter_map(|x| match x {
        Sx::List(v) if v.first().and_then(Sx::sym) == Some(key) => Some(&v[1..]),
        _ => None,
    }).next()
}

#[derive(Debug, Clone)]
struct Action {
    params: Vec<(String, String)>,
    pre: Sx,
    eff: Sx,
}

#[derive(Debug, Clone)]
pub struct Oracle {
    parent: HashMap<String, String>,
    actions: HashMap<String, Action>,
    objects: HashMap<String, String>,
    goal: Sx,
    pub init: OState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OState {
    pub atoms: BTreeSet<Vec<String>>,
    pub values: BTreeMap<Vec<String>, BigRational>,
}

type Binding<'a> = HashMap<&'a str, &'a str>;

impl Oracle {
    pub fn new(domain_text: &str, problem_text: &str) -> Self {
        let d = read(domain_text);
        let d = d.list();
        assert_eq!(d[0].sym(), Some("define"));
        let mut parent = HashMap::new();
        if let Some(types) = section(d, ":types") {
            for (t, p) in typed_list(types) {
                parent.insert(t, p);
            }
        }
        let mut objects: HashMap<String, String> = HashMap::new();
        if let Some(cs) = section(d, ":constants") {
            objects.extend(typed_list(cs));
        }
        let mut actions = HashMap::new();
        for item in d {
            let Sx::List(v) = item else { continue };
            if v.first().and_then(Sx::sym) != Some(":action") {
                continue;
            }
            let name = v[1].sym().expect("action name").to_string();
            let mut params = Vec::new();
            let mut pre = Sx::List(vec![Sx::Sym("and".into())]);
            let mut eff = Sx::List(vec![Sx::Sym("and".into())]);
            let mut k = 2;
            while k < v.len() {
                match v[k].sym() {
                    Some(":parameters") => params = typed_list(v[k + 1].list()),
                    Some(":precondition") => pre = v[k + 1].clone(),
                    Some(":effect") => eff = v[k + 1].clone(),
                    other => panic!("unexpected action key {other:?}"),
                }
                k += 2;
            }
            actions.insert(name, Action { params, pre, eff });
        }

        let p = read(problem_text);
        let p = p.list();
        if let Some(objs) = section(p, ":objects") {
            objects.extend(typed_list(objs));
        }
        let mut init = OState {
            atoms: BTreeSet::new(),
            values: BTreeMap::new(),
        };
        for fact in section(p, ":init").unwrap_or(&[]) {
            let v = fact.list();
            if v[0].sym() == Some("=") {
                let key = v[1].list().iter().map(|x| x.sym().expect("ground").to_string()).collect();
                init.values.insert(key, number(v[2].sym().expect("number")).expect("numeric literal"));
            } else {
                init.atoms.insert(v.iter().map(|x| x.sym().expect("ground").to_string()).collect());
            }
        }
        let goal = section(p, ":goal").expect("goal")[0].clone();
        Oracle {
            parent,
            actions,
            objects,
            goal,
            init,
        }
    }

    fn is_a<'a>(&'a self, mut t: &'a str, want: &str) -> bool {
        loop {
            if t == want || want == "object" {
                return true;
            }
            match self.parent.get(t) {
                Some(p) => t = p,
                None => return false,
            }
        }
    }

    /// Successor state, or None when the precondition fails.
    pub fn apply(&self, state: &OState, name: &str, args: &[String]) -> Option<OState> {
        let a = self.actions.get(name).unwrap_or_else(|| panic!("unknown action {name}"));
        assert_eq!(a.params.len(), args.len(), "arity of {name}");
        let mut b: Binding = HashMap::new();
        for ((var, ty), obj) in a.params.iter().zip(args) {
            let have = self.objects.get(obj).unwrap_or_else(|| panic!("unknown object {obj}"));
            assert!(self.is_a(have, ty), "{obj} is not a {ty}");
            b.insert(var.as_str(), obj.as_str());
        }
        if !self.holds(&a.pre, &b, state) {
            return None;
        }
        let mut adds = Vec::new();
        let mut dels = Vec::new();
        let mut sets = Vec::new();
        self.effects(&a.eff, &b, state, &mut adds, &mut dels, &mut sets);
        let mut next = state.clone();
        for d in dels {
            next.atoms.remove(&d);
        }
        next.atoms.extend(adds);
        for (k, v) in sets {
            next.values.insert(k, v);
        }
        Some(next)
    }

    pub fn goal(&self, state: &OState) -> bool {
        self.holds(&self.goal, &HashMap::new(), state)
    }

    fn ground(&self, items: &[Sx], b: &Binding) -> Vec<String> {
        items
            .iter()
            .map(|x| {
                let s = x.sym().expect("term");
                b.get(s).map(|o| o.to_string()).unwrap_or_else(|| s.to_string())
            })
            .collect()
    }

    fn holds(&self, f: &Sx, b: &Binding, s: &OState) -> bool {
        let v = f.list();
        let head = v.first().and_then(Sx::sym);
        match head {
            None => true,
            Some("and") => v[1..].iter().all(|g| self.holds(g, b, s)),
            Some("or") => v[1..].iter().any(|g| self.holds(g, b, s)),
            Some("not") => !self.holds(&v[1], b, s),
            Some("imply") => !self.holds(&v[1], b, s) || self.holds(&v[2], b, s),
            Some("=") if v[1].sym().is_some_and(|x| number(x).is_none()) && v[2].sym().is_some_and(|x| number(x).is_none()) => {
                let g = self.ground(&v[1..3], b);
                g[0] == g[1]
            }
            Some(op @ ("<" | "<=" | ">" | ">=" | "=")) => {
                let l = self.num(&v[1], b, s);
                let r = self.num(&v[2], b, s);
                match op {
                    "<" => l < r,
                    "<=" => l <= r,
                    ">" => l > r,
                    ">=" => l >= r,
                    _ => l == r,
                }
            }
            Some(_) => s.atoms.contains(&self.ground(v, b)),
        }
    }

    fn num(&self, e: &Sx, b: &Binding, s: &OState) -> BigRational {
        match e {
            Sx::Sym(t) => number(t).unwrap_or_else(|| panic!("not a number: {t}")),
            Sx::List(v) => {
                let op = v[0].sym().expect("head");
                if !matches!(op, "+" | "-" | "*" | "/") {
                    let key = self.ground(v, b);
                    return s.values.get(&key).cloned().unwrap_or_else(|| panic!("undefined {key:?}"));
                }
                let args: Vec<BigRational> = v[1..].iter().map(|x| self.num(x, b, s)).collect();
                match (op, args.as_slice()) {
                    ("+", _) => args.iter().fold(BigRational::zero(), |a, x| a + x),
                    ("-", [x]) => -x.clone(),
                    ("-", [x, y]) => x - y,
                    ("*", [x, y]) => x * y,
                    ("/", [x, y]) => x / y,
                    _ => panic!("bad arity for {op}"),
                }
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn effects(
        &self,
        e: &Sx,
        b: &Binding,
        s: &OState,
        adds: &mut Vec<Vec<String>>,
        dels: &mut Vec<Vec<String>>,
        sets: &mut Vec<(Vec<String>, BigRational)>,
    ) {
        let v = e.list();
        match v.first().and_then(Sx::sym) {
            None => {}
            Some("and") => {
                for x in &v[1..] {
                    self.effects(x, b, s, adds, dels, sets);
                }
            }
            Some("not") => dels.push(self.ground(v[1].list(), b)),
            Some(op @ ("increase" | "decrease" | "assign" | "scale-up" | "scale-down")) => {
                let key = self.ground(v[1].list(), b);
                let amount = self.num(&v[2], b, s);
                let old = || s.values.get(&key).cloned().unwrap_or_else(|| panic!("undefined {key:?}"));
                let new = match op {
                    "increase" => old() + amount,
                    "decrease" => old() - amount,
                    "scale-up" => old() * amount,
                    "scale-down" => old() / amount,
                    _ => amount,
                };
                sets.push((key, new));
            }
            Some(_) => adds.push(self.ground(v, b)),
        }
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
