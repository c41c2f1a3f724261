//! Profile and survey ingestion: JSONL profile dumps, CSV survey answers,
//! the eight-feature table and majority-vote trust labels.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

pub const DEFAULT_WINDOW: usize = 10;
pub const N_QUESTIONS: usize = 6;

/// Column order of the feature table. Downstream readers rely on it.
pub const FEATURE_NAMES: [&str; 8] = [
    "post",
    "follower",
    "following",
    "likes",
    "comments",
    "total_person",
    "pic_person",
    "self",
];

const PROFILE_KEYS: [&str; 5] = ["user_id", "followers", "following", "posts_total", "posts"];
const POST_KEYS: [&str; 7] = [
    "post_id",
    "likes",
    "comments",
    "created_at",
    "persons_total",
    "contains_person",
    "contains_self",
];

/// A value paired with non-fatal diagnostics produced while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Warned<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    pub likes: u64,
    pub comments: u64,
    pub created_at: i64,
    pub persons_total: u64,
    pub contains_person: bool,
    pub contains_self: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub user_id: String,
    pub followers: u64,
    pub following: u64,
    pub posts_total: u64,
    /// Most recent first.
    pub posts: Vec<PostRecord>,
}

// Wire forms accept signed counts so negatives get a precise message.
#[derive(Deserialize)]
struct RawPost {
    post_id: String,
    likes: i64,
    comments: i64,
    created_at: i64,
    persons_total: i64,
    contains_person: bool,
    contains_self: bool,
}

#[derive(Deserialize)]
struct RawProfile {
    user_id: String,
    followers: i64,
    following: i64,
    posts_total: i64,
    posts: Vec<RawPost>,
}

fn count(field: &str, v: i64) -> std::result::Result<u64, String> {
    u64::try_from(v).map_err(|_| format!("negative count for '{field}': {v}"))
}

impl PostRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.contains_person != (self.persons_total > 0) {
            return Err(format!(
                "post {}: contains_person={} inconsistent with persons_total={}",
                self.post_id, self.contains_person, self.persons_total
            ));
        }
        if self.contains_self && !self.contains_person {
            return Err(format!(
                "post {}: contains_self without contains_person",
                self.post_id
            ));
        }
        Ok(())
    }
}

impl ProfileRecord {
    /// Checks per-record invariants (uniqueness is checked by the reader).
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.user_id.is_empty() {
            return Err("empty user_id".into());
        }
        if self.posts.len() as u64 > self.posts_total {
            return Err(format!(
                "user {}: {} posts listed but posts_total is {}",
                self.user_id,
                self.posts.len(),
                self.posts_total
            ));
        }
        self.posts.iter().try_for_each(PostRecord::validate)
    }

    fn from_raw(raw: RawProfile) -> std::result::Result<Self, String> {
        let posts = raw
            .posts
            .into_iter()
            .map(|p| {
                Ok(PostRecord {
                    likes: count("likes", p.likes)?,
                    comments: count("comments", p.comments)?,
                    persons_total: count("persons_total", p.persons_total)?,
                    post_id: p.post_id,
                    created_at: p.created_at,
                    contains_person: p.contains_person,
                    contains_self: p.contains_self,
                })
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        Ok(Self {
            followers: count("followers", raw.followers)?,
            following: count("following", raw.following)?,
            posts_total: count("posts_total", raw.posts_total)?,
            user_id: raw.user_id,
            posts,
        })
    }
}

fn unknown_keys(v: &Value, known: &[&str]) -> Vec<String> {
    v.as_object()
        .map(|o| {
            o.keys()
                .filter(|k| !known.contains(&k.as_str()))
                .cloned()
                .collect()
        })
        .unwrap_or_default()
}

/// Reads one profile per line. Blank lines are skipped; unknown fields are
/// reported as warnings.
pub fn read_profiles<R: BufRead>(
    reader: R,
    source_name: &str,
) -> Result<Warned<Vec<ProfileRecord>>> {
    let input_err = |line: usize, message: String| Error::Input {
        source_name: source_name.to_string(),
        line: line as u64,
        message,
    };
    let mut profiles = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(&line).map_err(|e| input_err(lineno, e.to_string()))?;
        let mut unknown = unknown_keys(&value, &PROFILE_KEYS);
        if let Some(posts) = value.get("posts").and_then(Value::as_array) {
            for post in posts {
                for k in unknown_keys(post, &POST_KEYS) {
                    if !unknown.contains(&format!("posts[].{k}")) {
                        unknown.push(format!("posts[].{k}"));
                    }
                }
            }
        }
        if !unknown.is_empty() {
            warnings.push(format!(
                "{source_name}:{lineno}: ignoring unknown field(s): {}",
                unknown.join(", ")
            ));
        }
        let raw: RawProfile =
            serde_json::from_value(value).map_err(|e| input_err(lineno, e.to_string()))?;
        let profile = ProfileRecord::from_raw(raw).map_err(|m| input_err(lineno, m))?;
        profile.validate().map_err(|m| input_err(lineno, m))?;
        if !seen.insert(profile.user_id.clone()) {
            return Err(input_err(
                lineno,
                format!("duplicate user_id '{}'", profile.user_id),
            ));
        }
        profiles.push(profile);
    }
    Ok(Warned {
        value: profiles,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub post: u64,
    pub follower: u64,
    pub following: u64,
    pub likes: u64,
    pub comments: u64,
    pub total_person: u64,
    pub pic_person: u64,
    #[serde(rename = "self")]
    pub self_count: u64,
}

impl FeatureVector {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn to_array(&self) -> [u64; 8] {
        [
            self.post,
            self.follower,
            self.following,
            self.likes,
            self.comments,
            self.total_person,
            self.pic_person,
            self.self_count,
        ]
    }

    fn from_array(a: [u64; 8]) -> Self {
        Self {
            post: a[0],
            follower: a[1],
            following: a[2],
            likes: a[3],
            comments: a[4],
            total_person: a[5],
            pic_person: a[6],
            self_count: a[7],
        }
    }
}

/// Orders posts most recent first; equal timestamps fall back to post_id.
pub fn sort_posts(posts: &mut [PostRecord]) {
    posts.sort_by(|a, b| {
        b.created_at
            .cmp(&a.created_at)
            .then_with(|| a.post_id.cmp(&b.post_id))
    });
}

/// Builds the eight features from the `window` most recent posts.
pub fn extract_features(profile: &ProfileRecord, window: usize) -> Result<Warned<FeatureVector>> {
    if window == 0 {
        return Err(Error::validation("window must be at least 1"));
    }
    profile.validate().map_err(Error::Validation)?;
    let mut posts = profile.posts.clone();
    sort_posts(&mut posts);
    let mut warnings = Vec::new();
    if posts.is_empty() {
        warnings.push(format!(
            "user {}: no posts; post-derived features set to 0",
            profile.user_id
        ));
    } else if posts.len() < window {
        warnings.push(format!(
            "user {}: only {} posts, window truncated from {window}",
            profile.user_id,
            posts.len()
        ));
    }
    let recent = &posts[..posts.len().min(window)];
    let value = FeatureVector {
        post: profile.posts_total,
        follower: profile.followers,
        following: profile.following,
        likes: recent.iter().map(|p| p.likes).sum(),
        comments: recent.iter().map(|p| p.comments).sum(),
        total_person: recent.iter().map(|p| p.persons_total).sum(),
        pic_person: recent.iter().filter(|p| p.contains_person).count() as u64,
        self_count: recent.iter().filter(|p| p.contains_self).count() as u64,
    };
    Ok(Warned { value, warnings })
}

/// Feature rows keyed by user, in input order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub rows: Vec<(String, FeatureVector)>,
}

impl FeatureTable {
    pub fn from_profiles(profiles: &[ProfileRecord], window: usize) -> Result<Warned<Self>> {
        let mut rows = Vec::with_capacity(profiles.len());
        let mut warnings = Vec::new();
        for p in profiles {
            let fv = extract_features(p, window)?;
            warnings.extend(fv.warnings);
            rows.push((p.user_id.clone(), fv.value));
        }
        Ok(Warned {
            value: Self { rows },
            warnings,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn user_ids(&self) -> Vec<String> {
        self.rows.iter().map(|(u, _)| u.clone()).collect()
    }

    pub fn to_data_matrix(&self) -> Result<DataMatrix> {
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|(_, f)| f.to_array().iter().map(|&v| v as f64).collect())
            .collect();
        DataMatrix::from_rows(FEATURE_NAMES.iter().map(|s| s.to_string()).collect(), &rows)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["user_id"];
        header.extend(FEATURE_NAMES);
        out.write_record(&header).map_err(csv_io)?;
        for (user, f) in &self.rows {
            let mut rec = vec![user.clone()];
            rec.extend(f.to_array().iter().map(u64::to_string));
            out.write_record(&rec).map_err(csv_io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut expected = vec!["user_id"];
        expected.extend(FEATURE_NAMES);
        check_header(&mut rdr, &expected, source_name)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_err(source_name, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let mut vals = [0u64; 8];
            for (i, v) in vals.iter_mut().enumerate() {
                *v = rec[i + 1].trim().parse().map_err(|_| Error::Input {
                    source_name: source_name.to_string(),
                    line,
                    message: format!(
                        "invalid count '{}' in column {}",
                        &rec[i + 1],
                        FEATURE_NAMES[i]
                    ),
                })?;
            }
            rows.push((rec[0].to_string(), FeatureVector::from_array(vals)));
        }
        Ok(Self { rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    #[serde(rename = "Y")]
    Yes,
    #[serde(rename = "N")]
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub user_id: String,
    pub question: u8,
    pub worker_id: String,
    pub answer: Answer,
}

pub fn read_survey<R: Read>(r: R, source_name: &str) -> Result<Vec<SurveyResponse>> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(
        &mut rdr,
        &["user_id", "question", "worker_id", "answer"],
        source_name,
    )?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<SurveyResponse>() {
        let resp = rec.map_err(|e| csv_err(source_name, e))?;
        out.push(resp);
    }
    Ok(out)
}

pub fn write_survey<W: Write>(w: W, responses: &[SurveyResponse]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in responses {
        out.serialize(r).map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}

/// How even-sized vote groups and ties are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VoteMode {
    /// Odd group sizes only; anything else is an error.
    #[default]
    Strict,
    /// Ties and missing questions become label 0 with a warning.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UserLabels {
    pub labels: [u8; N_QUESTIONS],
    pub yes: [u32; N_QUESTIONS],
    pub no: [u32; N_QUESTIONS],
}

/// Majority-vote labels per user, ordered by user_id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelSet {
    pub users: BTreeMap<String, UserLabels>,
}

impl LabelSet {
    pub fn get(&self, user: &str) -> Option<&UserLabels> {
        self.users.get(user)
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// Labels for question `q` (1-based) in the order of `users`.
    pub fn column(&self, q: usize, users: &[String]) -> Result<Vec<u8>> {
        users
            .iter()
            .map(|u| {
                self.users
                    .get(u)
                    .map(|l| l.labels[q - 1])
                    .ok_or_else(|| Error::validation(format!("no labels for user '{u}'")))
            })
            .collect()
    }

    /// (positive, negative) counts for question `q` (1-based).
    pub fn class_counts(&self, q: usize) -> (usize, usize) {
        let pos = self.users.values().filter(|l| l.labels[q - 1] == 1).count();
        (pos, self.users.len() - pos)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["user_id", "q1", "q2", "q3", "q4", "q5", "q6"])
            .map_err(csv_io)?;
        for (user, l) in &self.users {
            let mut rec = vec![user.clone()];
            rec.extend(l.labels.iter().map(u8::to_string));
            out.write_record(&rec).map_err(csv_io)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a labels CSV. Tallies are not part of the file and stay zero.
    pub fn read_csv<R: Read>(r: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(
            &mut rdr,
            &["user_id", "q1", "q2", "q3", "q4", "q5", "q6"],
            source_name,
        )?;
        let mut users = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_err(source_name, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let mut entry = UserLabels::default();
            for q in 0..N_QUESTIONS {
                entry.labels[q] = match rec[q + 1].trim() {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(Error::Input {
                            source_name: source_name.to_string(),
                            line,
                            message: format!("label must be 0 or 1, got '{other}'"),
                        })
                    }
                };
            }
            if users.insert(rec[0].to_string(), entry).is_some() {
                return Err(Error::Input {
                    source_name: source_name.to_string(),
                    line,
                    message: format!("duplicate user_id '{}'", &rec[0]),
                });
            }
        }
        Ok(Self { users })
    }
}

/// Aggregates survey answers into one majority label per user and question.
pub fn aggregate_labels(responses: &[SurveyResponse], mode: VoteMode) -> Result<Warned<LabelSet>> {
    let mut seen = HashSet::new();
    let mut users: BTreeMap<String, UserLabels> = BTreeMap::new();
    for r in responses {
        if !(1..=N_QUESTIONS as u8).contains(&r.question) {
            return Err(Error::validation(format!(
                "user {}: question {} out of range 1..6",
                r.user_id, r.question
            )));
        }
        if !seen.insert((r.user_id.as_str(), r.question, r.worker_id.as_str())) {
            return Err(Error::validation(format!(
                "duplicate response: user {}, question {}, worker {}",
                r.user_id, r.question, r.worker_id
            )));
        }
        let entry = users.entry(r.user_id.clone()).or_default();
        let q = r.question as usize - 1;
        match r.answer {
            Answer::Yes => entry.yes[q] += 1,
            Answer::No => entry.no[q] += 1,
        }
    }

    let mut warnings = Vec::new();
    for (user, l) in users.iter_mut() {
        for q in 0..N_QUESTIONS {
            let (yes, no) = (l.yes[q], l.no[q]);
            let total = yes + no;
            let problem = if total == 0 {
                Some("no responses")
            } else if total % 2 == 0 && mode == VoteMode::Strict {
                Some("even number of responses")
            } else if yes == no {
                Some("tied vote")
            } else {
                None
            };
            if let Some(problem) = problem {
                let msg = format!(
                    "user {user}, question {}: {problem} ({yes} yes / {no} no)",
                    q + 1
                );
                match mode {
                    VoteMode::Strict => return Err(Error::Validation(msg)),
                    VoteMode::Lenient => warnings.push(format!("{msg}; labelled 0")),
                }
            }
            l.labels[q] = u8::from(yes > no);
        }
    }
    Ok(Warned {
        value: LabelSet { users },
        warnings,
    })
}

fn check_header<R: Read>(
    rdr: &mut csv::Reader<R>,
    expected: &[&str],
    source_name: &str,
) -> Result<()> {
    let header = rdr.headers().map_err(|e| csv_err(source_name, e))?;
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Input {
            source_name: source_name.to_string(),
            line: 1,
            message: format!(
                "expected header '{}', got '{}'",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn csv_err(source_name: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Input {
        source_name: source_name.to_string(),
        line,
        message: e.to_string(),
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(i: usize, likes: u64, comments: u64, persons: u64, has_self: bool) -> PostRecord {
        PostRecord {
            post_id: format!("p{i:02}"),
            likes,
            comments,
            created_at: 1_000_000 - i as i64,
            persons_total: persons,
            contains_person: persons > 0,
            contains_self: has_self,
        }
    }

    fn profile(posts: Vec<PostRecord>) -> ProfileRecord {
        ProfileRecord {
            user_id: "u1".into(),
            followers: 120,
            following: 80,
            posts_total: 50,
            posts,
        }
    }

    #[test]
    fn ten_post_window() {
        let p = profile((0..12).map(|i| post(i, 3, 1, 0, false)).collect());
        let f = extract_features(&p, DEFAULT_WINDOW).unwrap();
        assert_eq!(f.value.likes, 30);
        assert_eq!(f.value.comments, 10);
        assert_eq!(
            (f.value.post, f.value.follower, f.value.following),
            (50, 120, 80)
        );
        assert!(f.warnings.is_empty());
    }

    #[test]
    fn person_counting() {
        let persons = [2, 0, 1, 0, 0, 3, 0, 1, 0, 0];
        let selfie = [
            true, false, false, false, false, true, false, false, false, false,
        ];
        let p = profile(
            (0..10)
                .map(|i| post(i, 0, 0, persons[i], selfie[i]))
                .collect(),
        );
        let f = extract_features(&p, 10).unwrap().value;
        assert_eq!((f.total_person, f.pic_person, f.self_count), (7, 4, 2));
    }

    #[test]
    fn short_window_warns() {
        let p = profile(vec![
            post(0, 5, 0, 0, false),
            post(1, 7, 0, 0, false),
            post(2, 9, 0, 0, false),
        ]);
        let f = extract_features(&p, 10).unwrap();
        assert_eq!(f.value.likes, 5 + 7 + 9);
        assert_eq!(f.warnings.len(), 1);
        assert!(f.warnings[0].contains("window truncated"));
    }

    #[test]
    fn empty_posts_zeroed_with_warning() {
        let f = extract_features(&profile(vec![]), 10).unwrap();
        assert_eq!(f.value.likes + f.value.total_person + f.value.pic_person, 0);
        assert_eq!(f.value.follower, 120);
        assert_eq!(f.warnings.len(), 1);
    }

    #[test]
    fn window_uses_most_recent_posts() {
        let mut posts: Vec<PostRecord> = (0..4)
            .map(|i| post(i, 10 * (i as u64 + 1), 0, 0, false))
            .collect();
        posts.reverse();
        let f = extract_features(&profile(posts), 2).unwrap().value;
        // p00 (newest, 10) and p01 (20)
        assert_eq!(f.likes, 30);
    }

    #[test]
    fn zero_window_rejected() {
        assert!(extract_features(&profile(vec![]), 0).is_err());
    }

    #[test]
    fn jsonl_negative_count_is_hard_error() {
        let line = r#"{"user_id":"a","followers":-3,"following":1,"posts_total":0,"posts":[]}"#;
        let err = read_profiles(line.as_bytes(), "profiles.jsonl").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("profiles.jsonl:1:"), "{msg}");
        assert!(msg.contains("negative count for 'followers'"), "{msg}");
    }

    #[test]
    fn jsonl_unknown_fields_warn() {
        let text = concat!(
            r#"{"user_id":"a","followers":3,"following":1,"posts_total":1,"bio":"x","posts":[{"post_id":"p","likes":1,"comments":0,"created_at":5,"persons_total":0,"contains_person":false,"contains_self":false,"caption":"hi"}]}"#,
            "\n\n"
        );
        let parsed = read_profiles(text.as_bytes(), "p.jsonl").unwrap();
        assert_eq!(parsed.value.len(), 1);
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].contains("bio"));
        assert!(parsed.warnings[0].contains("posts[].caption"));
    }

    #[test]
    fn jsonl_rejects_duplicates_and_bad_annotations() {
        let a = r#"{"user_id":"a","followers":3,"following":1,"posts_total":0,"posts":[]}"#;
        let err = read_profiles(format!("{a}\n{a}\n").as_bytes(), "p.jsonl").unwrap_err();
        assert!(err.to_string().contains("p.jsonl:2: duplicate user_id"));

        let bad = r#"{"user_id":"b","followers":3,"following":1,"posts_total":1,"posts":[{"post_id":"p","likes":1,"comments":0,"created_at":5,"persons_total":0,"contains_person":false,"contains_self":true}]}"#;
        assert!(read_profiles(bad.as_bytes(), "p.jsonl").is_err());

        let too_many = r#"{"user_id":"c","followers":3,"following":1,"posts_total":0,"posts":[{"post_id":"p","likes":1,"comments":0,"created_at":5,"persons_total":0,"contains_person":false,"contains_self":false}]}"#;
        assert!(read_profiles(too_many.as_bytes(), "p.jsonl").is_err());
    }

    fn votes(user: &str, q: u8, yes: usize, no: usize) -> Vec<SurveyResponse> {
        (0..yes + no)
            .map(|w| SurveyResponse {
                user_id: user.into(),
                question: q,
                worker_id: format!("w{w}"),
                answer: if w < yes { Answer::Yes } else { Answer::No },
            })
            .collect()
    }

    fn full_user(user: &str, yes: usize, no: usize) -> Vec<SurveyResponse> {
        (1..=6).flat_map(|q| votes(user, q, yes, no)).collect()
    }

    #[test]
    fn majority_examples() {
        let mut r = full_user("a", 3, 2);
        r.extend(full_user("b", 0, 5));
        let ls = aggregate_labels(&r, VoteMode::Strict).unwrap().value;
        assert_eq!(ls.get("a").unwrap().labels, [1; 6]);
        assert_eq!(ls.get("b").unwrap().labels, [0; 6]);
        assert_eq!(ls.get("a").unwrap().yes[0], 3);
        assert_eq!(ls.get("b").unwrap().no[5], 5);
    }

    #[test]
    fn strict_rejects_even_groups_and_missing_questions() {
        assert!(aggregate_labels(&full_user("a", 2, 2), VoteMode::Strict).is_err());
        assert!(aggregate_labels(&full_user("a", 3, 1), VoteMode::Strict).is_err());
        let partial = votes("a", 1, 3, 2);
        assert!(aggregate_labels(&partial, VoteMode::Strict).is_err());
    }

    #[test]
    fn lenient_ties_become_zero() {
        let out = aggregate_labels(&full_user("a", 2, 2), VoteMode::Lenient).unwrap();
        assert_eq!(out.value.get("a").unwrap().labels, [0; 6]);
        assert_eq!(out.warnings.len(), 6);
        let out = aggregate_labels(&full_user("a", 3, 1), VoteMode::Lenient).unwrap();
        assert_eq!(out.value.get("a").unwrap().labels, [1; 6]);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn duplicate_votes_rejected() {
        let mut r = full_user("a", 3, 2);
        r.push(r[0].clone());
        let err = aggregate_labels(&r, VoteMode::Lenient).unwrap_err();
        assert!(err.to_string().contains("duplicate response"));
    }

    #[test]
    fn survey_csv_parsing() {
        let text = "user_id,question,worker_id,answer\nu1,1,w1,Y\nu1,1,w2,N\n";
        let r = read_survey(text.as_bytes(), "s.csv").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].answer, Answer::No);
        let bad = "user_id,question,worker_id,answer\nu1,1,w1,maybe\n";
        let err = read_survey(bad.as_bytes(), "s.csv").unwrap_err();
        assert!(err.to_string().starts_with("s.csv:2:"), "{err}");
        let wrong_header = "user,question,worker_id,answer\n";
        assert!(read_survey(wrong_header.as_bytes(), "s.csv").is_err());
    }

    #[test]
    fn feature_csv_layout() {
        let table = FeatureTable {
            rows: vec![(
                "u1".into(),
                FeatureVector::from_array([1, 2, 3, 4, 5, 6, 5, 4]),
            )],
        };
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "user_id,post,follower,following,likes,comments,total_person,pic_person,self\nu1,1,2,3,4,5,6,5,4\n"
        );
        assert_eq!(
            FeatureTable::read_csv(text.as_bytes(), "f.csv").unwrap(),
            table
        );
    }

    #[test]
    fn labels_csv_layout() {
        let ls = aggregate_labels(&full_user("a", 3, 2), VoteMode::Strict)
            .unwrap()
            .value;
        let mut buf = Vec::new();
        ls.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "user_id,q1,q2,q3,q4,q5,q6\na,1,1,1,1,1,1\n");
        let back = LabelSet::read_csv(text.as_bytes(), "l.csv").unwrap();
        assert_eq!(back.get("a").unwrap().labels, [1; 6]);
    }
}
