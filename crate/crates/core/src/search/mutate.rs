//! Single-edit mutations of a program.
//!
//! Edits touch only interior positions — index 0 (`scene_parse`) and the
//! final instruction are fixed endpoints. For a program of length `l` with
//! interior indices `1..=l-2` and an alphabet of `V` variants, the operator
//! emits, in this order:
//!
//! * transpositions of adjacent interior pairs `(i, i+1)`, both interior;
//! * deletions of one interior instruction;
//! * changes of one interior instruction to any other alphabet variant;
//! * insertions of one variant at an interior position (before index
//!   `1..=l-2`);
//! * paired loop insertions: `loop_start` before an interior position, with
//!   the matching `loop_end` at every later position up to and including
//!   appending after the final instruction.
//!
//! The paired form is the only edit allowed to extend past the last
//! instruction; it is what turns an unrolled body into a loop over trailing
//! instructions. Duplicates (by canonical encoding) are emitted once, and
//! mutants that lose the leading `scene_parse` are skipped.

use std::collections::HashSet;

use crate::emulator::{ops, Instruction, Opcode, Program};

/// All distinct single-edit mutants of `program` over `alphabet`, in
/// deterministic order. The original program is never included.
pub fn mutants(program: &Program, alphabet: &[Instruction]) -> Vec<Program> {
    let src = program.instructions();
    let l = src.len();
    let mut out: Vec<Program> = Vec::new();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    seen.insert(program.encode());
    let mut push = |insts: Vec<Instruction>, out: &mut Vec<Program>| {
        let p = Program::new(insts);
        if p.validate().is_err() {
            return;
        }
        if seen.insert(p.encode()) {
            out.push(p);
        }
    };
    if l < 2 {
        return out;
    }
    let interior = 1..=l.saturating_sub(2);

    for i in interior.clone() {
        if i + 1 <= l - 2 {
            let mut v = src.to_vec();
            v.swap(i, i + 1);
            push(v, &mut out);
        }
    }
    for i in interior.clone() {
        let mut v = src.to_vec();
        v.remove(i);
        push(v, &mut out);
    }
    for i in interior.clone() {
        for inst in alphabet {
            if *inst == src[i] {
                continue;
            }
            let mut v = src.to_vec();
            v[i] = *inst;
            push(v, &mut out);
        }
    }
    for i in interior.clone() {
        for inst in alphabet {
            if matches!(inst.opcode(), Opcode::LoopStart | Opcode::LoopEnd) {
                continue;
            }
            let mut v = src.to_vec();
            v.insert(i, *inst);
            push(v, &mut out);
        }
    }
    if alphabet.contains(&ops::loop_start()) && alphabet.contains(&ops::loop_end()) {
        for i in interior {
            let mut with_start = src.to_vec();
            with_start.insert(i, ops::loop_start());
            for j in i + 1..=l + 1 {
                let mut v = with_start.clone();
                v.insert(j, ops::loop_end());
                push(v, &mut out);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulator::registry;
    use crate::world::Color;

    fn prog(insts: Vec<Instruction>) -> Program {
        Program::new(insts)
    }

    /// Independent census: counts mutants by exhaustively checking, for every
    /// program at edit distance one (over a small alphabet), whether it is
    /// reachable by the documented edits. Guards the generator against silent
    /// range mistakes.
    #[test]
    fn census_matches_independent_enumeration() {
        let a = ops::top_down_attend();
        let b = ops::grab_object();
        let alphabet = [
            ops::scene_parse(),
            a,
            b,
            ops::release_object(),
            ops::loop_start(),
            ops::loop_end(),
        ];
        let base = prog(vec![ops::scene_parse(), a, b, ops::release_object()]);

        // Enumerate every instruction sequence of length 3..=6 over the
        // alphabet and keep those the edit rules can produce.
        let mut expected: std::collections::BTreeSet<Vec<u8>> = Default::default();
        let mut stack: Vec<Vec<Instruction>> = vec![vec![]];
        while let Some(seq) = stack.pop() {
            if seq.len() < 6 {
                for inst in &alphabet {
                    let mut next = seq.clone();
                    next.push(*inst);
                    stack.push(next);
                }
            }
            if seq.len() < 3 || seq.len() > 6 {
                continue;
            }
            let cand = prog(seq.clone());
            if cand.validate().is_err() || cand.encode() == base.encode() {
                continue;
            }
            if is_single_edit(base.instructions(), &seq, &alphabet) {
                expected.insert(cand.encode());
            }
        }

        let got: std::collections::BTreeSet<Vec<u8>> = mutants(&base, &alphabet)
            .iter()
            .map(|p| p.encode())
            .collect();
        assert_eq!(got, expected);
    }

    /// Mirror of the documented edit rules, written against sequences rather
    /// than the generator's loops.
    fn is_single_edit(src: &[Instruction], cand: &[Instruction], alphabet: &[Instruction]) -> bool {
        let l = src.len();
        let interior = |i: usize| i >= 1 && i + 2 <= l;
        // transposition
        for i in 1..l {
            if interior(i) && interior(i + 1) {
                let mut v = src.to_vec();
                v.swap(i, i + 1);
                if v == cand {
                    return true;
                }
            }
        }
        // deletion
        for i in 1..l {
            if interior(i) {
                let mut v = src.to_vec();
                v.remove(i);
                if v == cand {
                    return true;
                }
            }
        }
        // change
        for i in 1..l {
            if interior(i) {
                for inst in alphabet {
                    if inst != &src[i] {
                        let mut v = src.to_vec();
                        v[i] = *inst;
                        if v == cand {
                            return true;
                        }
                    }
                }
            }
        }
        // insertion (loop markers only as a pair)
        for i in 1..l {
            if interior(i) {
                for inst in alphabet {
                    if matches!(inst.opcode(), Opcode::LoopStart | Opcode::LoopEnd) {
                        continue;
                    }
                    let mut v = src.to_vec();
                    v.insert(i, *inst);
                    if v == cand {
                        return true;
                    }
                }
            }
        }
        // paired loop insertion, loop_end may append at the very end
        for i in 1..l {
            if interior(i) {
                for j in i + 1..=l + 1 {
                    let mut v = src.to_vec();
                    v.insert(i, ops::loop_start());
                    v.insert(j, ops::loop_end());
                    if v == cand {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn three_instruction_program_gets_single_position_edits() {
        // With one interior index there are no transpositions, one deletion,
        // V-1 changes, V insertions, and loop pairs at the three later slots.
        let alphabet = registry();
        let a = ops::top_down_attend();
        let b = ops::fill_color(Color::Red);
        let base = prog(vec![ops::scene_parse(), a, b]);
        let all = mutants(&base, alphabet);

        let deletions: Vec<_> = all.iter().filter(|p| p.len() == 2).collect();
        assert_eq!(deletions.len(), 1);

        // Length-3 mutants are changes at index 1; `scene_parse` is skipped
        // by validation, so V-2 remain (the original is excluded too).
        let changes: Vec<_> = all.iter().filter(|p| p.len() == 3).collect();
        assert_eq!(changes.len(), alphabet.len() - 2);
        assert!(changes.iter().all(|p| p.get(2) == Some(&b)));

        // Length-4 mutants are insertions at index 1 only (never before the
        // last instruction), minus scene_parse and the loop markers, which
        // insert only as a pair.
        let insertions: Vec<_> = all.iter().filter(|p| p.len() == 4).collect();
        assert_eq!(insertions.len(), alphabet.len() - 3);
        assert!(insertions
            .iter()
            .all(|p| p.get(2) == Some(&a) && p.get(3) == Some(&b)));

        // Loop pairs: start before index 1, end at slots 2, 3, or 4; the
        // immediately-adjacent pair is structurally valid so all 3 appear.
        let pairs: Vec<_> = all.iter().filter(|p| p.len() == 5).collect();
        assert_eq!(pairs.len(), 3);
        assert!(pairs
            .iter()
            .all(|p| p.get(1) == Some(&ops::loop_start())));
    }

    #[test]
    fn endpoints_are_never_edited() {
        let alphabet = registry();
        let base = prog(vec![
            ops::scene_parse(),
            ops::set_color_attn(Color::Red),
            ops::top_down_attend(),
            ops::grab_object(),
            ops::release_object(),
        ]);
        for m in mutants(&base, alphabet) {
            assert_eq!(m.get(0), Some(&ops::scene_parse()));
            let last = m.get(m.len() - 1).unwrap();
            assert!(
                *last == ops::release_object() || *last == ops::loop_end(),
                "last instruction may change only by a loop_end append: {m}"
            );
        }
    }

    #[test]
    fn mutants_are_distinct_and_exclude_the_original() {
        let alphabet = registry();
        let base = prog(vec![
            ops::scene_parse(),
            ops::top_down_attend(),
            ops::top_down_attend(),
            ops::grab_object(),
        ]);
        let all = mutants(&base, alphabet);
        let set: HashSet<Vec<u8>> = all.iter().map(|p| p.encode()).collect();
        assert_eq!(set.len(), all.len(), "duplicate mutants emitted");
        assert!(!set.contains(&base.encode()));
    }
}
