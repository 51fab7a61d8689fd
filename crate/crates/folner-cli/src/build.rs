//! Turning textual specs into library objects, per carrier group. Shared
//! spec names (prng, constant, indicator, all, ones, intervals catalogs)
//! are handled generically; each group adds the constructions that exist
//! for it.

use folner::symbolic::Alphabet;
use folner::{
    bfree_indicator, bind_automaton_int, bind_automaton_vec2, bind_word_automaton, constant,
    digit_system_int, digit_system_vec2, indicator_symbolic, int_intervals,
    lattice_kfree_indicator, mult_automatic, mult_thue_morse, nat_factorial_intervals,
    nat_intervals, natmul_boxes, parse_automaton, parse_digit_system, perm_incr_indicator,
    perm_symmetric, prng_uniform, residue_indicator, sqrt2_halfline_indicator,
    squarefree_indicator, thue_morse_int, thue_morse_nat, vec_cubes, vh_automatic, FinPerm,
    FiniteSet, FolnerSequence, GroupContext, IntAdd, NatAdd, NatMul, SubsetPredicate, Symbolic,
    VecAdd,
};

use crate::config::Resolved;

fn lib_err(e: folner::Error) -> String {
    e.to_string()
}

/// Split `head:rest`, with the rest optional.
fn split_spec(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((head, rest)) => (head, Some(rest)),
        None => (spec, None),
    }
}

fn rest_of<'a>(spec: &str, rest: Option<&'a str>) -> Result<&'a str, String> {
    rest.ok_or_else(|| format!("spec {spec} needs arguments after ':'"))
}

/// A carrier the CLI can drive: group-specific spec vocabularies on top of
/// the shared ones.
pub trait CliGroup: GroupContext {
    /// Build the generator named by `--gen`.
    fn build_generator(&self, cfg: &Resolved) -> Result<Symbolic<Self>, String> {
        let spec = cfg.gen.as_deref().ok_or("missing --gen")?;
        match shared_generator(self, spec, cfg.seed)? {
            Some(stream) => Ok(stream),
            None => self.group_generator(spec, cfg),
        }
    }

    /// Group-specific generators; the shared names were already tried.
    fn group_generator(&self, spec: &str, _cfg: &Resolved) -> Result<Symbolic<Self>, String> {
        Err(format!("unknown generator {spec} for group {}", self.name()))
    }

    /// Build the subset named by `--set`. `stream` carries the generated
    /// symbolic function so that `ones` can select along it.
    fn build_subset(
        &self,
        spec: &str,
        stream: Option<&Symbolic<Self>>,
    ) -> Result<SubsetPredicate<Self>, String> {
        match shared_subset(self, spec, stream)? {
            Some(set) => Ok(set),
            None => self.group_subset(spec),
        }
    }

    /// Group-specific subsets; the shared names were already tried.
    fn group_subset(&self, spec: &str) -> Result<SubsetPredicate<Self>, String> {
        Err(format!("unknown set {spec} for group {}", self.name()))
    }

    /// The Følner sequence named by `--folner` (or the group default).
    fn build_folner(&self, name: Option<&str>) -> Result<FolnerSequence<Self>, String>;

    /// The test-domain catalog named by `--catalog`.
    fn build_catalog(&self, spec: &str) -> Result<Vec<FiniteSet<Self::Elem>>, String> {
        enumeration_catalog(self, spec)
    }
}

/// Generators available on every carrier. Returns Ok(None) when the name is
/// not a shared one.
fn shared_generator<G: CliGroup>(
    ctx: &G,
    spec: &str,
    seed: Option<u64>,
) -> Result<Option<Symbolic<G>>, String> {
    let (head, rest) = split_spec(spec);
    match head {
        "prng" => {
            let size: u8 = match rest {
                Some(r) => r.parse().map_err(|_| format!("bad alphabet size in {spec}"))?,
                None => 2,
            };
            let alphabet = Alphabet::of_size(size).map_err(lib_err)?;
            let seed = seed.ok_or("generator prng requires --seed")?;
            Ok(Some(prng_uniform(seed, alphabet)))
        }
        "constant" => {
            let rest = rest_of(spec, rest)?;
            let (sym, size) = match rest.split_once(',') {
                Some((s, k)) => (
                    s.parse().map_err(|_| format!("bad symbol in {spec}"))?,
                    k.parse().map_err(|_| format!("bad alphabet size in {spec}"))?,
                ),
                None => (rest.parse().map_err(|_| format!("bad symbol in {spec}"))?, 2u8),
            };
            let alphabet = Alphabet::of_size(size).map_err(lib_err)?;
            Ok(Some(constant(alphabet, sym).map_err(lib_err)?))
        }
        "indicator" => {
            let set = ctx.build_subset(rest_of(spec, rest)?, None)?;
            Ok(Some(indicator_symbolic(&set)))
        }
        _ => Ok(None),
    }
}

/// Subsets available on every carrier. Returns Ok(None) when the name is
/// not a shared one.
fn shared_subset<G: CliGroup>(
    _ctx: &G,
    spec: &str,
    stream: Option<&Symbolic<G>>,
) -> Result<Option<SubsetPredicate<G>>, String> {
    match spec {
        "all" => Ok(Some(SubsetPredicate::full())),
        "ones" => {
            let y = stream.ok_or("set ones needs a generated stream (--gen)")?.clone();
            Ok(Some(SubsetPredicate::new("ones of the stream", move |ctx: &G, g: &G::Elem| {
                y.eval(ctx, g) == 1
            })))
        }
        _ => Ok(None),
    }
}

/// `intervals:M` → the chain K_m = first m carrier elements in enumeration
/// order, for m = 1..=M. Strictly increasing by construction.
fn enumeration_catalog<G: GroupContext>(
    ctx: &G,
    spec: &str,
) -> Result<Vec<FiniteSet<G::Elem>>, String> {
    let (head, rest) = split_spec(spec);
    if head != "intervals" {
        return Err(format!("unknown catalog {spec} for group {}", ctx.name()));
    }
    let m_max: usize = rest_of(spec, rest)?
        .parse()
        .map_err(|_| format!("bad catalog depth in {spec}"))?;
    if !(1..=64).contains(&m_max) {
        return Err(format!("catalog depth must be in 1..=64, got {m_max}"));
    }
    Ok((1..=m_max)
        .map(|m| FiniteSet::from_elems((0..m as u64).map(|i| ctx.enumerate(i))))
        .collect())
}

fn read_instance_file(path: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))
}

// ---------------------------------------------------------------------------
// Per-group vocabularies
// ---------------------------------------------------------------------------

impl CliGroup for NatAdd {
    fn group_generator(&self, spec: &str, _cfg: &Resolved) -> Result<Symbolic<Self>, String> {
        match spec {
            "thue-morse" => Ok(thue_morse_nat()),
            _ => Err(format!("unknown generator {spec} for group {}", self.name())),
        }
    }

    fn group_subset(&self, spec: &str) -> Result<SubsetPredicate<Self>, String> {
        let (head, rest) = split_spec(spec);
        match head {
            "evens" => residue_indicator(2, 0).map_err(lib_err),
            "odds" => residue_indicator(2, 1).map_err(lib_err),
            "residue" => {
                let rest = rest_of(spec, rest)?;
                let (m, r) = rest
                    .split_once(',')
                    .ok_or_else(|| format!("residue spec {spec} needs m,r"))?;
                let m = m.parse().map_err(|_| format!("bad modulus in {spec}"))?;
                let r = r.parse().map_err(|_| format!("bad residue in {spec}"))?;
                residue_indicator(m, r).map_err(lib_err)
            }
            "positives" => Ok(SubsetPredicate::new("n>=1", |_: &NatAdd, g: &u64| *g >= 1)),
            "squarefree" => Ok(squarefree_indicator()),
            "bfree" => {
                let moduli: Vec<u64> = rest_of(spec, rest)?
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|_| format!("bad modulus in {spec}")))
                    .collect::<Result<_, _>>()?;
                bfree_indicator(moduli).map_err(lib_err)
            }
            "sqrt2-halfline" => Ok(sqrt2_halfline_indicator()),
            _ => Err(format!("unknown set {spec} for group {}", self.name())),
        }
    }

    fn build_folner(&self, name: Option<&str>) -> Result<FolnerSequence<Self>, String> {
        match name.unwrap_or("intervals") {
            "intervals" => Ok(nat_intervals()),
            "factorial" => Ok(nat_factorial_intervals()),
            other => Err(format!("unknown Følner sequence {other} for group N")),
        }
    }
}

impl CliGroup for IntAdd {
    fn group_generator(&self, spec: &str, _cfg: &Resolved) -> Result<Symbolic<Self>, String> {
        let (head, rest) = split_spec(spec);
        match head {
            "thue-morse" => Ok(thue_morse_int()),
            "automatic" => {
                let rest = rest_of(spec, rest)?;
                let (aut_path, ds_path) = rest
                    .split_once(',')
                    .ok_or_else(|| format!("automatic spec {spec} needs <aut-file>,<ds-file>"))?;
                let aut_spec = parse_automaton(&read_instance_file(aut_path)?).map_err(lib_err)?;
                let ds_spec =
                    parse_digit_system(&read_instance_file(ds_path)?).map_err(lib_err)?;
                let automaton = bind_automaton_int(&aut_spec, self).map_err(lib_err)?;
                let system = digit_system_int(&ds_spec, self).map_err(lib_err)?;
                vh_automatic(self, automaton, system).map_err(lib_err)
            }
            _ => Err(format!("unknown generator {spec} for group {}", self.name())),
        }
    }

    fn build_folner(&self, name: Option<&str>) -> Result<FolnerSequence<Self>, String> {
        match name.unwrap_or("intervals") {
            "intervals" => Ok(int_intervals()),
            other => Err(format!("unknown Følner sequence {other} for group Z")),
        }
    }
}

impl CliGroup for VecAdd<2> {
    fn group_generator(&self, spec: &str, _cfg: &Resolved) -> Result<Symbolic<Self>, String> {
        let (head, rest) = split_spec(spec);
        match head {
            "automatic" => {
                let rest = rest_of(spec, rest)?;
                let (aut_path, ds_path) = rest
                    .split_once(',')
                    .ok_or_else(|| format!("automatic spec {spec} needs <aut-file>,<ds-file>"))?;
                let aut_spec = parse_automaton(&read_instance_file(aut_path)?).map_err(lib_err)?;
                let ds_spec =
                    parse_digit_system(&read_instance_file(ds_path)?).map_err(lib_err)?;
                let automaton = bind_automaton_vec2(&aut_spec, self).map_err(lib_err)?;
                let system = digit_system_vec2(&ds_spec, self).map_err(lib_err)?;
                vh_automatic(self, automaton, system).map_err(lib_err)
            }
            _ => Err(format!("unknown generator {spec} for group {}", self.name())),
        }
    }

    fn group_subset(&self, spec: &str) -> Result<SubsetPredicate<Self>, String> {
        vec_subset::<2>(self, spec)
    }

    fn build_folner(&self, name: Option<&str>) -> Result<FolnerSequence<Self>, String> {
        vec_folner::<2>(name)
    }

    fn build_catalog(&self, spec: &str) -> Result<Vec<FiniteSet<Self::Elem>>, String> {
        vec_catalog::<2>(self, spec)
    }
}

impl CliGroup for VecAdd<3> {
    fn group_subset(&self, spec: &str) -> Result<SubsetPredicate<Self>, String> {
        vec_subset::<3>(self, spec)
    }

    fn build_folner(&self, name: Option<&str>) -> Result<FolnerSequence<Self>, String> {
        vec_folner::<3>(name)
    }

    fn build_catalog(&self, spec: &str) -> Result<Vec<FiniteSet<Self::Elem>>, String> {
        vec_catalog::<3>(self, spec)
    }
}

fn vec_subset<const D: usize>(
    ctx: &VecAdd<D>,
    spec: &str,
) -> Result<SubsetPredicate<VecAdd<D>>, String> {
    let (head, rest) = split_spec(spec);
    match head {
        "kfree" => {
            let k = rest_of(spec, rest)?
                .parse()
                .map_err(|_| format!("bad exponent in {spec}"))?;
            lattice_kfree_indicator::<D>(k).map_err(lib_err)
        }
        _ => Err(format!("unknown set {spec} for group {}", ctx.name())),
    }
}

fn vec_folner<const D: usize>(name: Option<&str>) -> Result<FolnerSequence<VecAdd<D>>, String> {
    match name.unwrap_or("cubes") {
        "cubes" => Ok(vec_cubes::<D>()),
        other => Err(format!("unknown Følner sequence {other} for group Z^{D}")),
    }
}

/// `cubes:M` → K_m = [0, m−1]^D for m = 1..=M; falls back to the shared
/// enumeration catalog.
fn vec_catalog<const D: usize>(
    ctx: &VecAdd<D>,
    spec: &str,
) -> Result<Vec<FiniteSet<[i64; D]>>, String> {
    let (head, rest) = split_spec(spec);
    if head != "cubes" {
        return enumeration_catalog(ctx, spec);
    }
    let m_max: usize = rest_of(spec, rest)?
        .parse()
        .map_err(|_| format!("bad catalog depth in {spec}"))?;
    if !(1..=16).contains(&m_max) {
        return Err(format!("cube catalog depth must be in 1..=16, got {m_max}"));
    }
    let mut out = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let mut cells = Vec::new();
        let mut point = [0i64; D];
        'walk: loop {
            cells.push(point);
            let mut axis = D;
            loop {
                if axis == 0 {
                    break 'walk;
                }
                axis -= 1;
                if point[axis] < m as i64 - 1 {
                    point[axis] += 1;
                    for c in point.iter_mut().skip(axis + 1) {
                        *c = 0;
                    }
                    break;
                }
                point[axis] = 0;
            }
        }
        out.push(FiniteSet::from_elems(cells));
    }
    Ok(out)
}

impl CliGroup for NatMul {
    fn group_generator(&self, spec: &str, _cfg: &Resolved) -> Result<Symbolic<Self>, String> {
        let (head, rest) = split_spec(spec);
        match head {
            "mult-thue-morse" => Ok(mult_thue_morse()),
            "mult-automatic" => {
                let rest = rest_of(spec, rest)?;
                let (aut_path, base) = rest
                    .split_once(',')
                    .ok_or_else(|| format!("mult-automatic spec {spec} needs <aut-file>,<base>"))?;
                let base: u32 = base.parse().map_err(|_| format!("bad base in {spec}"))?;
                let aut_spec = parse_automaton(&read_instance_file(aut_path)?).map_err(lib_err)?;
                let automaton = bind_word_automaton(&aut_spec, base).map_err(lib_err)?;
                mult_automatic(automaton, base).map_err(lib_err)
            }
            _ => Err(format!("unknown generator {spec} for group {}", self.name())),
        }
    }

    fn build_folner(&self, name: Option<&str>) -> Result<FolnerSequence<Self>, String> {
        match name.unwrap_or("boxes") {
            "boxes" => Ok(natmul_boxes()),
            other => Err(format!("unknown Følner sequence {other} for group Nmul")),
        }
    }
}

impl CliGroup for FinPerm {
    fn group_subset(&self, spec: &str) -> Result<SubsetPredicate<Self>, String> {
        let (head, rest) = split_spec(spec);
        match head {
            "incr" => {
                let k = rest_of(spec, rest)?
                    .parse()
                    .map_err(|_| format!("bad prefix length in {spec}"))?;
                perm_incr_indicator(k).map_err(lib_err)
            }
            _ => Err(format!("unknown set {spec} for group {}", self.name())),
        }
    }

    fn build_folner(&self, name: Option<&str>) -> Result<FolnerSequence<Self>, String> {
        match name.unwrap_or("sym") {
            "sym" => Ok(perm_symmetric()),
            other => Err(format!("unknown Følner sequence {other} for group Perm")),
        }
    }
}
