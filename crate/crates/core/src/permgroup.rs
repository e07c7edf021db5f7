//! Symmetric-group machinery: permutations, cycle structure, the canonical
//! element ordering and the hard-coded character tables of S₃ and S₄.
//!
//! Everything here is exact integer arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest degree accepted by [`enumerate_group`] (8! = 40320 elements).
pub const MAX_DEGREE: usize = 8;

/// A permutation of `{0, …, n-1}` stored as its image sequence: `i ↦ images[i]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from its image sequence, rejecting non-bijections.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty image sequence".into()));
        }
        let mut seen = vec![false; n];
        for &im in &images {
            if im >= n || seen[im] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 0..{n}"
                )));
            }
            seen[im] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation of degree `n` from disjoint cycles, e.g.
    /// `from_cycles(4, &[&[0, 1]])` is the transposition (0 1).
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &a) in cycle.iter().enumerate() {
                if a >= n || touched[a] {
                    return Err(Error::InvalidPermutation(format!(
                        "cycles {cycles:?} are not disjoint in degree {n}"
                    )));
                }
                touched[a] = true;
                images[a] = cycle[(k + 1) % cycle.len()];
            }
        }
        Self::new(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Image of `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    ///
    /// Panics if the degrees differ.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in compose");
        Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &im) in self.images.iter().enumerate() {
            inv[im] = i;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &im)| i == im)
    }

    /// Disjoint cycles, fixed points included as 1-cycles. Each cycle starts
    /// at its smallest element and lists `a, p(a), p(p(a)), …`.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut a = start;
            while !seen[a] {
                seen[a] = true;
                cycle.push(a);
                a = self.images[a];
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle type as a partition, largest part first.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut parts: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.images)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nontrivial: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if nontrivial.is_empty() {
            return f.write_str("()");
        }
        for c in nontrivial {
            let body: Vec<String> = c.iter().map(|a| a.to_string()).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

/// Number of cycles `l(p)`, fixed points counted.
pub fn cycle_count(p: &Permutation) -> usize {
    p.cycles().len()
}

/// Character of the natural tensor representation: `χ(p) = d^{l(p)}`.
pub fn natural_character(p: &Permutation, d: u64) -> BigInt {
    num_traits::pow(BigInt::from(d), cycle_count(p))
}

/// All `n!` elements of `S_n` in lexicographic order of their image
/// sequences. Element 0 is the identity.
#[derive(Clone, Debug)]
pub struct CanonicalGroupOrder {
    n: usize,
    elements: Vec<Permutation>,
    inverse_index: Vec<usize>,
}

impl CanonicalGroupOrder {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn get(&self, idx: usize) -> &Permutation {
        &self.elements[idx]
    }

    /// Position of `p` in the canonical order.
    pub fn index_of(&self, p: &Permutation) -> usize {
        assert_eq!(p.degree(), self.n, "degree mismatch in index_of");
        lex_rank(p.images())
    }

    /// Position of the inverse of element `idx`.
    pub fn inverse_index(&self, idx: usize) -> usize {
        self.inverse_index[idx]
    }

    /// Index of `elements[g] ∘ elements[h]`.
    pub fn product_index(&self, g: usize, h: usize) -> usize {
        self.index_of(&self.elements[g].compose(&self.elements[h]))
    }
}

/// Rank of a permutation among all permutations of the same degree in
/// lexicographic order (Lehmer code).
fn lex_rank(images: &[usize]) -> usize {
    let n = images.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller_later = images[i + 1..].iter().filter(|&&x| x < images[i]).count();
        rank = rank * (n - i) + smaller_later;
    }
    rank
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

pub fn enumerate_group(n: usize) -> Result<CanonicalGroupOrder> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange { n, max: MAX_DEGREE });
    }
    let mut elements = Vec::with_capacity(factorial(n));
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        elements.push(Permutation {
            images: current.clone(),
        });
        if !next_permutation(&mut current) {
            break;
        }
    }
    let inverse_index = elements.iter().map(|p| lex_rank(p.inverse().images())).collect();
    Ok(CanonicalGroupOrder {
        n,
        elements,
        inverse_index,
    })
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// A conjugacy class, identified by its cycle type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyClass {
    pub cycle_type: Vec<usize>,
    pub size: usize,
}

impl ConjugacyClass {
    /// Number of cycles of any member.
    pub fn cycle_count(&self) -> usize {
        self.cycle_type.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Irrep {
    pub label: &'static str,
    pub dimension: usize,
    /// Character value on each class, same order as [`CharacterTable::classes`].
    pub characters: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct CharacterTable {
    n: usize,
    classes: Vec<ConjugacyClass>,
    irreps: Vec<Irrep>,
}

impl CharacterTable {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> &[ConjugacyClass] {
        &self.classes
    }

    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    pub fn group_order(&self) -> usize {
        factorial(self.n)
    }

    /// Index of the class containing `p`.
    pub fn class_of(&self, p: &Permutation) -> usize {
        let ct = p.cycle_type();
        self.classes
            .iter()
            .position(|c| c.cycle_type == ct)
            .expect("character table covers every cycle type")
    }

    /// `χ^α(p)`.
    pub fn character(&self, alpha: usize, p: &Permutation) -> i64 {
        self.irreps[alpha].characters[self.class_of(p)]
    }

    /// `(1/n!) Σ_i |C_i| χ^α(C_i) χ^β(C_i)`, as an exact fraction
    /// `(numerator, n!)`. Characters of S_n are real, so no conjugation.
    pub fn inner_product_numerator(&self, alpha: usize, beta: usize) -> i64 {
        self.classes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.size as i64 * self.irreps[alpha].characters[i] * self.irreps[beta].characters[i]
            })
            .sum()
    }
}

/// Hard-coded character tables of S₃ and S₄.
///
/// Irrep order follows the multiplicity lists
/// `k = (trivial, sign, …)`: for S₃ `(trivial, sign, standard)`, for S₄
/// `(trivial, sign, 2-dim, standard ⊗ sign, standard)`.
pub fn character_table(n: usize) -> Result<CharacterTable> {
    let (classes, irreps) = match n {
        3 => (
            vec![
                class(&[1, 1, 1], 1),
                class(&[2, 1], 3),
                class(&[3], 2),
            ],
            vec![
                irrep("trivial", 1, &[1, 1, 1]),
                irrep("sign", 1, &[1, -1, 1]),
                irrep("standard", 2, &[2, 0, -1]),
            ],
        ),
        4 => (
            vec![
                class(&[1, 1, 1, 1], 1),
                class(&[2, 1, 1], 6),
                class(&[2, 2], 3),
                class(&[3, 1], 8),
                class(&[4], 6),
            ],
            vec![
                irrep("trivial", 1, &[1, 1, 1, 1, 1]),
                irrep("sign", 1, &[1, -1, 1, 1, -1]),
                irrep("two", 2, &[2, 0, 2, -1, 0]),
                irrep("standard-sign", 3, &[3, -1, -1, 0, 1]),
                irrep("standard", 3, &[3, 1, -1, 0, -1]),
            ],
        ),
        _ => return Err(Error::UnsupportedDegree(n)),
    };
    Ok(CharacterTable { n, classes, irreps })
}

fn class(cycle_type: &[usize], size: usize) -> ConjugacyClass {
    ConjugacyClass {
        cycle_type: cycle_type.to_vec(),
        size,
    }
}

fn irrep(label: &'static str, dimension: usize, characters: &[i64]) -> Irrep {
    Irrep {
        label,
        dimension,
        characters: characters.to_vec(),
    }
}

/// Irrep multiplicities `k_α = (χ^D, χ^α)` of the natural representation on
/// `(ℂ^d)^{⊗n}`, computed by the class-sum scalar product.
pub fn multiplicities(n: usize, d: u64) -> Result<Vec<BigInt>> {
    let table = character_table(n)?;
    let order = BigInt::from(table.group_order());
    let mut out = Vec::with_capacity(table.irreps().len());
    for irrep in table.irreps() {
        let mut acc = BigInt::zero();
        for (i, c) in table.classes().iter().enumerate() {
            let chi_d = num_traits::pow(BigInt::from(d), c.cycle_count());
            acc += chi_d * BigInt::from(c.size) * BigInt::from(irrep.characters[i]);
        }
        debug_assert!((&acc % &order).is_zero());
        out.push(acc / &order);
    }
    Ok(out)
}

/// Closed-form polynomial multiplicities for S₃ and S₄, in the same irrep
/// order as [`character_table`].
pub fn multiplicities_closed_form(n: usize, d: u64) -> Result<Vec<BigInt>> {
    let d = BigInt::from(d);
    let one = BigInt::one();
    let two = BigInt::from(2);
    let three = BigInt::from(3);
    let dm1 = &d - &one;
    let dp1 = &d + &one;
    let dm2 = &d - &two;
    let dp2 = &d + &two;
    let d2m1 = &d * &d - &one;
    match n {
        3 => Ok(vec![
            &d * &dp1 * &dp2 / 6,
            &d * &dm1 * &dm2 / 6,
            &d * &d2m1 / 3,
        ]),
        4 => Ok(vec![
            &d * &dp1 * &dp2 * (&d + &three) / 24,
            &d * &dm1 * &dm2 * (&d - &three) / 24,
            &two * &d * &d * &d2m1 / 24,
            &three * &d * &d2m1 * &dm2 / 24,
            &three * &d * &d2m1 * &dp2 / 24,
        ]),
        _ => Err(Error::UnsupportedDegree(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn enumerate_small_groups() {
        let s1 = enumerate_group(1).unwrap();
        assert_eq!(s1.len(), 1);
        assert!(s1.get(0).is_identity());

        let s3 = enumerate_group(3).unwrap();
        assert_eq!(s3.len(), 6);
        assert!(s3.get(0).is_identity());

        let s4 = enumerate_group(4).unwrap();
        assert_eq!(s4.len(), 24);
        let mut sorted = s4.elements().to_vec();
        sorted.dedup();
        assert_eq!(sorted.len(), 24);
        for w in s4.elements().windows(2) {
            assert!(w[0].images() < w[1].images());
        }
    }

    #[test]
    fn degree_out_of_range() {
        assert!(matches!(enumerate_group(0), Err(Error::DegreeOutOfRange { .. })));
        assert!(matches!(enumerate_group(9), Err(Error::DegreeOutOfRange { .. })));
    }

    #[test]
    fn index_lookup_round_trips() {
        let s4 = enumerate_group(4).unwrap();
        for (i, p) in s4.elements().iter().enumerate() {
            assert_eq!(s4.index_of(p), i);
            assert_eq!(s4.get(s4.inverse_index(i)), &p.inverse());
        }
    }

    #[test]
    fn cycle_counts() {
        assert_eq!(cycle_count(&Permutation::identity(4)), 4);
        let t = Permutation::from_cycles(4, &[&[0, 1]]).unwrap();
        assert_eq!(cycle_count(&t), 3);
        let c4 = Permutation::from_cycles(4, &[&[0, 1, 2, 3]]).unwrap();
        assert_eq!(cycle_count(&c4), 1);
    }

    #[test]
    fn natural_character_values() {
        assert_eq!(natural_character(&Permutation::identity(4), 2), BigInt::from(16));
        let t = Permutation::from_cycles(3, &[&[0, 1]]).unwrap();
        for d in 1..6 {
            assert_eq!(natural_character(&t, d), BigInt::from(d * d));
        }
        let c3 = Permutation::from_cycles(3, &[&[0, 1, 2]]).unwrap();
        assert_eq!(natural_character(&c3, 3), BigInt::from(3));
    }

    #[test]
    fn rejects_bad_permutations() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::from_cycles(3, &[&[0, 1], &[1, 2]]).is_err());
    }

    #[test]
    fn compose_and_inverse() {
        let s4 = enumerate_group(4).unwrap();
        for p in s4.elements() {
            assert!(p.compose(&p.inverse()).is_identity());
            assert!(p.inverse().compose(p).is_identity());
        }
        let a = Permutation::new(vec![1, 2, 0]).unwrap();
        let b = Permutation::new(vec![1, 0, 2]).unwrap();
        // (a∘b)(0) = a(b(0)) = a(1) = 2
        assert_eq!(a.compose(&b).apply(0), 2);
    }

    #[test]
    fn display_cycle_notation() {
        let p = Permutation::from_cycles(4, &[&[0, 2], &[1, 3]]).unwrap();
        assert_eq!(p.to_string(), "(0 2)(1 3)");
        assert_eq!(Permutation::identity(3).to_string(), "()");
    }

    #[test]
    fn character_table_shapes() {
        let t3 = character_table(3).unwrap();
        let sizes: Vec<_> = t3.classes().iter().map(|c| c.size).collect();
        assert_eq!(sizes, vec![1, 3, 2]);
        let dims: Vec<_> = t3.irreps().iter().map(|r| r.dimension).collect();
        assert_eq!(dims, vec![1, 1, 2]);

        let t4 = character_table(4).unwrap();
        assert_eq!(t4.classes().len(), 5);
        let dims: Vec<_> = t4.irreps().iter().map(|r| r.dimension).collect();
        assert_eq!(dims, vec![1, 1, 2, 3, 3]);
        assert!(character_table(5).is_err());
    }

    #[test]
    fn character_table_invariants() {
        for n in [3, 4] {
            let t = character_table(n).unwrap();
            let order = t.group_order();
            assert_eq!(t.classes().iter().map(|c| c.size).sum::<usize>(), order);
            assert_eq!(t.irreps().iter().map(|r| r.dimension.pow(2)).sum::<usize>(), order);
            for a in 0..t.irreps().len() {
                for b in 0..t.irreps().len() {
                    let expected = if a == b { order as i64 } else { 0 };
                    assert_eq!(t.inner_product_numerator(a, b), expected, "n={n} a={a} b={b}");
                }
                assert_eq!(t.irreps()[a].characters[0], t.irreps()[a].dimension as i64);
            }
        }
    }

    #[test]
    fn class_sizes_match_enumeration() {
        for n in [3, 4] {
            let g = enumerate_group(n).unwrap();
            let t = character_table(n).unwrap();
            let mut counts = vec![0; t.classes().len()];
            for p in g.elements() {
                counts[t.class_of(p)] += 1;
            }
            let sizes: Vec<_> = t.classes().iter().map(|c| c.size).collect();
            assert_eq!(counts, sizes);
        }
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicities(4, 4).unwrap(), big(&[35, 1, 20, 15, 45]));
        assert_eq!(multiplicities(3, 2).unwrap(), big(&[4, 0, 2]));
        assert_eq!(multiplicities(3, 3).unwrap(), big(&[10, 1, 8]));
        assert!(multiplicities(5, 2).is_err());
    }

    #[test]
    fn multiplicities_match_closed_forms_and_dimension() {
        for n in [3usize, 4] {
            let t = character_table(n).unwrap();
            for d in 1..=12u64 {
                let k = multiplicities(n, d).unwrap();
                assert_eq!(k, multiplicities_closed_form(n, d).unwrap(), "n={n} d={d}");
                let total: BigInt = k
                    .iter()
                    .zip(t.irreps())
                    .map(|(k, r)| k * BigInt::from(r.dimension))
                    .sum();
                assert_eq!(total, num_traits::pow(BigInt::from(d), n));
            }
        }
    }
}
