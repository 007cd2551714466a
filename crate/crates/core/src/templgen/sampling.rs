//! Seeded, cell-balanced adjective sampling and character-pair construction.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::vocab::{AdjectiveEntry, Vocabulary};
use crate::BinaryGender;

use super::{AdverbSelection, CharacterDescription, TemplGenError, TemplateParams};

/// Derive an independent ChaCha stream from the suite seed and a path of
/// string tags, so each base template draws from its own stable stream.
pub fn derive_rng(seed: u64, tags: &[&str]) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for tag in tags {
        hasher.update([0x1f]);
        hasher.update(tag.as_bytes());
    }
    ChaCha12Rng::from_seed(hasher.finalize().into())
}

/// Draw `n` distinct adjectives from `pool`, spreading draws as evenly as
/// the cell sizes allow across the (sentiment, type) trait cells.
///
/// Cells are visited round-robin in a fixed order, each holding a seeded
/// shuffle of its members, so the draw is deterministic for a given rng.
pub fn balanced_sample<'a>(
    pool: &[&'a AdjectiveEntry],
    n: usize,
    rng: &mut ChaCha12Rng,
    what: &str,
) -> Result<Vec<&'a AdjectiveEntry>, TemplGenError> {
    if pool.len() < n {
        return Err(TemplGenError::InsufficientVocabulary {
            what: what.to_string(),
            need: n,
            have: pool.len(),
        });
    }
    let mut cells: Vec<(String, Vec<&AdjectiveEntry>)> = Vec::new();
    for adj in pool {
        let key = format!("{:?}/{:?}", adj.sentiment, adj.adj_type);
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(adj),
            None => cells.push((key, vec![adj])),
        }
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, members) in cells.iter_mut() {
        members.shuffle(rng);
    }
    // rotate which cells small draws land on, or every 4-adjective base
    // template would sample the same four cells
    cells.shuffle(rng);

    let mut out = Vec::with_capacity(n);
    let mut offsets = vec![0usize; cells.len()];
    while out.len() < n {
        let mut progressed = false;
        for (ci, (_, members)) in cells.iter().enumerate() {
            if out.len() == n {
                break;
            }
            if offsets[ci] < members.len() {
                out.push(members[offsets[ci]]);
                offsets[ci] += 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    debug_assert_eq!(out.len(), n);
    Ok(out)
}

/// The global Stereo-Adverb adjective sample (full scale: 130 of 350).
pub fn sample_adverb_adjectives(
    v: &Vocabulary,
    n: usize,
    seed: u64,
) -> Result<Vec<AdjectiveEntry>, TemplGenError> {
    let pool: Vec<&AdjectiveEntry> = v.adjectives().iter().collect();
    let mut rng = derive_rng(seed, &["stereo_adverb", "adjective_sample"]);
    let sample = balanced_sample(&pool, n, &mut rng, "stereo-adverb adjective sample")?;
    Ok(sample.into_iter().cloned().collect())
}

/// Resolve the adverb selection: explicit from params, else the first
/// `adverbs_per_stereotype` lemmas per stereotype in sorted order.
pub fn select_adverbs(
    v: &Vocabulary,
    params: &TemplateParams,
) -> Result<(Vec<String>, Vec<String>), TemplGenError> {
    let per = params.adverbs_per_stereotype;
    if let Some(AdverbSelection { m, f }) = &params.adverb_selection {
        for lemma in m.iter().chain(f) {
            if v.adverb(lemma).is_none() {
                return Err(TemplGenError::UnknownLemma {
                    lemma: lemma.clone(),
                    what: "selected adverb",
                });
            }
        }
        return Ok((m.clone(), f.clone()));
    }
    let pick = |gender: BinaryGender| -> Result<Vec<String>, TemplGenError> {
        let mut lemmas: Vec<String> = v
            .adverbs()
            .iter()
            .filter(|a| a.stereotype == gender)
            .map(|a| a.lemma.clone())
            .collect();
        lemmas.sort();
        if lemmas.len() < per {
            return Err(TemplGenError::InsufficientVocabulary {
                what: format!("{gender}-stereotyped adverbs"),
                need: per,
                have: lemmas.len(),
            });
        }
        lemmas.truncate(per);
        Ok(lemmas)
    };
    Ok((pick(BinaryGender::M)?, pick(BinaryGender::F)?))
}

/// Build the stereotype-matched (C_F, C_M) character pairs: occupations in
/// file order, each assigned a same-stereotype adjective from a seeded
/// shuffle (cycling when there are fewer adjectives than occupations).
pub fn build_character_pairs(
    v: &Vocabulary,
    seed: u64,
) -> Result<Vec<(CharacterDescription, CharacterDescription)>, TemplGenError> {
    let mut rng = derive_rng(seed, &["character_pairs"]);
    let mut describe = |gender: BinaryGender| -> Result<Vec<CharacterDescription>, TemplGenError> {
        let occs: Vec<_> = v
            .occupations()
            .iter()
            .filter(|o| o.stereotype == gender)
            .collect();
        let mut adjs: Vec<_> = v
            .adjectives()
            .iter()
            .filter(|a| a.stereotype.as_binary() == Some(gender))
            .collect();
        if adjs.is_empty() || occs.is_empty() {
            return Err(TemplGenError::InsufficientVocabulary {
                what: format!("{gender}-stereotyped character vocabulary"),
                need: 1,
                have: 0,
            });
        }
        adjs.shuffle(&mut rng);
        Ok(occs
            .iter()
            .enumerate()
            .map(|(i, occ)| CharacterDescription {
                adj_lemma: adjs[i % adjs.len()].lemma.clone(),
                occ_lemma: occ.lemma.clone(),
                stereotype: gender,
            })
            .collect())
    };
    let f = describe(BinaryGender::F)?;
    let m = describe(BinaryGender::M)?;
    Ok(f.into_iter().zip(m).collect())
}

/// Invariant check used by the character generators: the description's
/// adjective and occupation must both carry the description's stereotype,
/// and the pair must have the (C_F, C_M) shape.
pub fn check_pair(
    v: &Vocabulary,
    pair: &(CharacterDescription, CharacterDescription),
) -> Result<(), TemplGenError> {
    if pair.0.stereotype != BinaryGender::F || pair.1.stereotype != BinaryGender::M {
        return Err(TemplGenError::MismatchedPair {
            adj: pair.0.adj_lemma.clone(),
            adj_stereo: pair.0.stereotype,
            occ: pair.1.occ_lemma.clone(),
            occ_stereo: pair.1.stereotype,
        });
    }
    for c in [&pair.0, &pair.1] {
        let adj_stereo = v
            .adjective(&c.adj_lemma)
            .ok_or_else(|| TemplGenError::UnknownLemma {
                lemma: c.adj_lemma.clone(),
                what: "character adjective",
            })?
            .stereotype
            .as_binary();
        let occ_stereo = v
            .occupations()
            .iter()
            .find(|o| o.lemma == c.occ_lemma)
            .ok_or_else(|| TemplGenError::UnknownLemma {
                lemma: c.occ_lemma.clone(),
                what: "character occupation",
            })?
            .stereotype;
        if adj_stereo != Some(c.stereotype) || occ_stereo != c.stereotype {
            return Err(TemplGenError::MismatchedPair {
                adj: c.adj_lemma.clone(),
                adj_stereo: adj_stereo.unwrap_or(occ_stereo),
                occ: c.occ_lemma.clone(),
                occ_stereo,
            });
        }
    }
    Ok(())
}
