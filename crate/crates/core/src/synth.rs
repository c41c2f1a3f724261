//! Synthetic profiles and survey answers drawn from a three-factor model.
//!
//! Each profile has three independent standard-normal latent traits:
//!
//! * `social_proof` drives how often people (and the user) appear in posts,
//!   and how many people appear in each such post;
//! * `approval` drives followers, and through them likes and comments;
//! * `disclosure` drives the total post count and the following count.
//!
//! Survey answers come from five raters per (profile, question). Each rater
//! says yes with probability `σ(2·(β_q · traits + c_q))`, so labels depend on
//! the traits only through a linear score per question.

use rand::Rng as _;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::ingest::{Answer, PostRecord, ProfileRecord, SurveyResponse, N_QUESTIONS};
use crate::rng::{seeded, Rng};

pub const RATERS_PER_QUESTION: usize = 5;
pub const POSTS_PER_PROFILE: usize = 10;
const EPOCH_START: i64 = 1_483_228_800;

/// Per-question trait weights and offset for the rater model.
pub const QUESTION_WEIGHTS: [([f64; 3], f64); N_QUESTIONS] = [
    ([1.2, 0.8, 0.5], 0.6),
    ([1.1, 0.8, 0.4], 0.5),
    ([-0.9, -0.6, -0.3], -0.8),
    ([0.6, 0.5, 0.6], 0.1),
    ([1.1, 0.7, 0.4], 0.6),
    ([0.9, 0.6, 0.5], 0.4),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Traits {
    pub social_proof: f64,
    pub approval: f64,
    pub disclosure: f64,
}

impl Traits {
    fn as_array(&self) -> [f64; 3] {
        [self.social_proof, self.approval, self.disclosure]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub profiles: Vec<ProfileRecord>,
    pub survey: Vec<SurveyResponse>,
    pub traits: Vec<Traits>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn lognormal_count(rng: &mut Rng, log_mean: f64, trait_value: f64, slope: f64, noise: f64) -> u64 {
    let eps: f64 = Normal::new(0.0, noise).expect("valid sd").sample(rng);
    (log_mean + slope * trait_value + eps).exp().round() as u64
}

fn poisson(rng: &mut Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

fn profile(rng: &mut Rng, index: usize, t: &Traits) -> ProfileRecord {
    let user_id = format!("user{index:04}");
    let followers = lognormal_count(rng, 6.0, t.approval, 0.8, 0.25);
    let following = lognormal_count(rng, 5.5, t.disclosure, 0.7, 0.3);
    let posts_total =
        lognormal_count(rng, 4.5, t.disclosure, 0.7, 0.3).max(POSTS_PER_PROFILE as u64);

    let p_person = sigmoid(0.3 + 2.0 * t.social_proof);
    let p_self = sigmoid(0.5 + 2.0 * t.social_proof);
    let crowd = (0.2 + 0.5 * t.social_proof).exp();
    let mut created_at = EPOCH_START + rng.gen_range(0..86_400 * 30);
    let posts = (0..POSTS_PER_PROFILE)
        .map(|j| {
            created_at -= rng.gen_range(3_600..86_400 * 7);
            let contains_person = rng.gen_bool(p_person);
            let persons_total = if contains_person {
                1 + poisson(rng, crowd)
            } else {
                0
            };
            let contains_self = contains_person && rng.gen_bool(p_self);
            let engagement = Normal::new(0.0, 0.15).expect("valid sd").sample(rng);
            PostRecord {
                post_id: format!("{user_id}-p{j:02}"),
                likes: poisson(rng, followers as f64 * 0.08 * f64::exp(engagement)),
                comments: poisson(rng, followers as f64 * 0.01 * f64::exp(engagement)),
                created_at,
                persons_total,
                contains_person,
                contains_self,
            }
        })
        .collect();
    ProfileRecord {
        user_id,
        followers,
        following,
        posts_total,
        posts,
    }
}

fn rater_answers(rng: &mut Rng, user_id: &str, t: &Traits) -> Vec<SurveyResponse> {
    let x = t.as_array();
    let mut out = Vec::with_capacity(N_QUESTIONS * RATERS_PER_QUESTION);
    for (q, (beta, offset)) in QUESTION_WEIGHTS.iter().enumerate() {
        let utility: f64 = offset + beta.iter().zip(&x).map(|(b, v)| b * v).sum::<f64>();
        let p_yes = sigmoid(2.0 * utility);
        for w in 0..RATERS_PER_QUESTION {
            out.push(SurveyResponse {
                user_id: user_id.to_string(),
                question: q as u8 + 1,
                worker_id: format!("w{:02}", (q * RATERS_PER_QUESTION + w) % 37),
                answer: if rng.gen_bool(p_yes) {
                    Answer::Yes
                } else {
                    Answer::No
                },
            });
        }
    }
    out
}

/// Draws `n` synthetic profiles and their survey answers.
pub fn generate(n: usize, seed: u64) -> SyntheticDataset {
    let mut rng = seeded(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut profiles = Vec::with_capacity(n);
    let mut survey = Vec::with_capacity(n * N_QUESTIONS * RATERS_PER_QUESTION);
    let mut traits = Vec::with_capacity(n);
    for i in 0..n {
        let t = Traits {
            social_proof: normal.sample(&mut rng),
            approval: normal.sample(&mut rng),
            disclosure: normal.sample(&mut rng),
        };
        let p = profile(&mut rng, i, &t);
        survey.extend(rater_answers(&mut rng, &p.user_id, &t));
        profiles.push(p);
        traits.push(t);
    }
    SyntheticDataset {
        profiles,
        survey,
        traits,
    }
}

/// A survey whose per-question yes-count histogram equals `patterns`
/// (`patterns[q][y]` profiles received `y` yes votes out of five on question
/// `q + 1`). Profiles are named `user0000..`; the total per question must
/// be the same for every question.
pub fn survey_from_vote_patterns(patterns: &[[usize; 6]; N_QUESTIONS]) -> Vec<SurveyResponse> {
    let n: usize = patterns[0].iter().sum();
    assert!(
        patterns.iter().all(|p| p.iter().sum::<usize>() == n),
        "uneven totals"
    );
    let mut out = Vec::with_capacity(n * N_QUESTIONS * RATERS_PER_QUESTION);
    for (q, counts) in patterns.iter().enumerate() {
        let mut user = 0;
        for (yes, &count) in counts.iter().enumerate() {
            for _ in 0..count {
                for w in 0..RATERS_PER_QUESTION {
                    out.push(SurveyResponse {
                        user_id: format!("user{user:04}"),
                        question: q as u8 + 1,
                        worker_id: format!("w{w}"),
                        answer: if w < yes { Answer::Yes } else { Answer::No },
                    });
                }
                user += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{aggregate_labels, VoteMode};

    #[test]
    fn generated_profiles_are_valid() {
        let d = generate(50, 3);
        assert_eq!(d.profiles.len(), 50);
        for p in &d.profiles {
            p.validate().unwrap();
            assert_eq!(p.posts.len(), POSTS_PER_PROFILE);
            assert!(p
                .posts
                .windows(2)
                .all(|w| w[0].created_at > w[1].created_at));
        }
        let labels = aggregate_labels(&d.survey, VoteMode::Strict).unwrap();
        assert_eq!(labels.value.len(), 50);
    }

    #[test]
    fn generation_is_seed_deterministic() {
        assert_eq!(generate(20, 11).profiles, generate(20, 11).profiles);
        assert_ne!(generate(20, 11).profiles, generate(20, 12).profiles);
    }

    #[test]
    fn pattern_survey_shape() {
        let patterns = [[1, 0, 0, 0, 0, 1]; 6];
        let s = survey_from_vote_patterns(&patterns);
        assert_eq!(s.len(), 2 * 6 * 5);
        let labels = aggregate_labels(&s, VoteMode::Strict).unwrap().value;
        assert_eq!(labels.class_counts(1), (1, 1));
    }
}
