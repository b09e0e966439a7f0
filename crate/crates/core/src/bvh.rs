//! Reading and writing BioVision Hierarchy (BVH) motion files.
//!
//! A BVH document has two sections. `HIERARCHY` declares the joint tree: each
//! joint carries an `OFFSET` from its parent and a `CHANNELS` list naming the
//! degrees of freedom it animates. `MOTION` declares a frame count, a frame
//! time and then one whitespace-separated row of channel values per frame, in
//! the depth-first order the channels were declared.
//!
//! ```text
//! HIERARCHY
//! ROOT Hips
//! {
//!     OFFSET 0 0 0
//!     CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
//!     JOINT Spine
//!     {
//!         OFFSET 0 10 0
//!         CHANNELS 3 Zrotation Xrotation Yrotation
//!         End Site
//!         {
//!             OFFSET 0 5 0
//!         }
//!     }
//! }
//! MOTION
//! Frames: 1
//! Frame Time: 0.0166667
//! 0 0 0 0 0 0 0 0 0
//! ```
//!
//! `End Site` blocks become joints named `<parent>_end` with no channels, so
//! the flattened joint index stays uniform.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BvhError {
    #[error("line {line}: malformed hierarchy: {reason}")]
    MalformedHierarchy { line: usize, reason: String },
    #[error("declared {declared} frames but found {actual}")]
    FrameCountMismatch { declared: usize, actual: usize },
    #[error("line {line}: frame {frame} has {found} values, expected {expected}")]
    ChannelArityMismatch {
        line: usize,
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: non-numeric value `{token}`")]
    NonNumericValue { line: usize, token: String },
}

pub type Result<T> = std::result::Result<T, BvhError>;

/// One animatable degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Xposition,
    Yposition,
    Zposition,
    Xrotation,
    Yrotation,
    Zrotation,
}

impl Channel {
    pub fn is_rotation(self) -> bool {
        matches!(self, Channel::Xrotation | Channel::Yrotation | Channel::Zrotation)
    }

    /// Axis index, 0 = X, 1 = Y, 2 = Z.
    pub fn axis(self) -> usize {
        match self {
            Channel::Xposition | Channel::Xrotation => 0,
            Channel::Yposition | Channel::Yrotation => 1,
            Channel::Zposition | Channel::Zrotation => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Xposition => "Xposition",
            Channel::Yposition => "Yposition",
            Channel::Zposition => "Zposition",
            Channel::Xrotation => "Xrotation",
            Channel::Yrotation => "Yrotation",
            Channel::Zrotation => "Zrotation",
        }
    }
}

impl FromStr for Channel {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        // Exporters disagree on capitalisation ("XPOSITION", "Xposition").
        match s.to_ascii_lowercase().as_str() {
            "xposition" => Ok(Channel::Xposition),
            "yposition" => Ok(Channel::Yposition),
            "zposition" => Ok(Channel::Zposition),
            "xrotation" => Ok(Channel::Xrotation),
            "yrotation" => Ok(Channel::Yrotation),
            "zrotation" => Ok(Channel::Zrotation),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub offset: [f64; 3],
    /// Kept in file order; rotation order is semantic.
    pub channels: Vec<Channel>,
    pub children: Vec<Joint>,
    pub is_end_site: bool,
}

impl Joint {
    pub fn new(name: impl Into<String>, offset: [f64; 3], channels: Vec<Channel>) -> Self {
        Joint {
            name: name.into(),
            offset,
            channels,
            children: Vec::new(),
            is_end_site: false,
        }
    }

    pub fn end_site(parent_name: &str, offset: [f64; 3]) -> Self {
        Joint {
            name: format!("{parent_name}_end"),
            offset,
            channels: Vec::new(),
            children: Vec::new(),
            is_end_site: true,
        }
    }

    pub fn with_child(mut self, child: Joint) -> Self {
        self.children.push(child);
        self
    }
}

/// A joint in the flattened depth-first index.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEntry {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: [f64; 3],
    pub channels: Vec<Channel>,
    /// Column of this joint's first channel in a frame row.
    pub channel_offset: usize,
    pub is_end_site: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub root: Joint,
    pub joint_index: Vec<JointEntry>,
    pub total_channels: usize,
}

impl Skeleton {
    pub fn new(root: Joint) -> Self {
        let mut joint_index = Vec::new();
        let mut total_channels = 0;
        flatten(&root, None, &mut joint_index, &mut total_channels);
        Skeleton {
            root,
            joint_index,
            total_channels,
        }
    }

    pub fn joint_count(&self) -> usize {
        self.joint_index.len()
    }

    /// Every column as `(joint index, channel)`, in frame-row order.
    pub fn columns(&self) -> Vec<(usize, Channel)> {
        self.joint_index
            .iter()
            .enumerate()
            .flat_map(|(j, e)| e.channels.iter().map(move |&c| (j, c)))
            .collect()
    }

    pub fn rotation_columns(&self) -> Vec<usize> {
        self.columns()
            .iter()
            .enumerate()
            .filter(|(_, (_, c))| c.is_rotation())
            .map(|(i, _)| i)
            .collect()
    }
}

fn flatten(joint: &Joint, parent: Option<usize>, out: &mut Vec<JointEntry>, cursor: &mut usize) {
    let index = out.len();
    out.push(JointEntry {
        name: joint.name.clone(),
        parent,
        offset: joint.offset,
        channels: joint.channels.clone(),
        channel_offset: *cursor,
        is_end_site: joint.is_end_site,
    });
    *cursor += joint.channels.len();
    for child in &joint.children {
        flatten(child, Some(index), out, cursor);
    }
}

/// Emotion class a clip belongs to. Unknown directory names map to `Other`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Label {
    Angry,
    Depressed,
    Neutral,
    Proud,
    Other(String),
}

impl Label {
    pub fn as_str(&self) -> &str {
        match self {
            Label::Angry => "angry",
            Label::Depressed => "depressed",
            Label::Neutral => "neutral",
            Label::Proud => "proud",
            Label::Other(s) => s,
        }
    }

    pub fn unlabeled() -> Self {
        Label::Other("unlabeled".to_owned())
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        match s.to_ascii_lowercase().as_str() {
            "angry" => Label::Angry,
            "depressed" => Label::Depressed,
            "neutral" => Label::Neutral,
            "proud" => Label::Proud,
            _ => Label::Other(s.to_owned()),
        }
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label::from(s.as_str())
    }
}

impl From<Label> for String {
    fn from(l: Label) -> Self {
        l.as_str().to_owned()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Real,
    Synthetic,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Real => "real",
            Provenance::Synthetic => "synthetic",
        })
    }
}

/// A frames × channels matrix plus metadata. One row is one pose vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    pub frame_time: f64,
    pub frames: Vec<Vec<f64>>,
    pub label: Label,
    pub provenance: Provenance,
    pub source_id: String,
}

impl MotionClip {
    pub fn new(frame_time: f64, frames: Vec<Vec<f64>>) -> Self {
        MotionClip {
            frame_time,
            frames,
            label: Label::unlabeled(),
            provenance: Provenance::Real,
            source_id: String::new(),
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }

    pub fn with_source(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Width of the first row; 0 for an empty clip.
    pub fn channel_count(&self) -> usize {
        self.frames.first().map_or(0, Vec::len)
    }

    pub fn duration(&self) -> f64 {
        self.frame_time * self.frames.len() as f64
    }

    /// Copy with the same metadata but new frame data.
    pub fn with_frames(&self, frames: Vec<Vec<f64>>) -> Self {
        MotionClip {
            frame_time: self.frame_time,
            frames,
            label: self.label.clone(),
            provenance: self.provenance,
            source_id: self.source_id.clone(),
        }
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
}

struct Cursor<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(Token { text: t.text, line: t.line })
            }
            None => Err(BvhError::MalformedHierarchy {
                line: self.last_line,
                reason: format!("unexpected end of file, expected {what}"),
            }),
        }
    }

    fn expect(&mut self, keyword: &str) -> Result<Token<'a>> {
        let tok = self.next(keyword)?;
        if tok.text.eq_ignore_ascii_case(keyword) {
            Ok(tok)
        } else {
            Err(malformed(tok.line, format!("expected `{keyword}`, found `{}`", tok.text)))
        }
    }

    /// The remaining tokens on the current line, joined by single spaces.
    fn rest_of_line(&mut self) -> Result<String> {
        let first = self.next("a name")?;
        let mut name = first.text.to_owned();
        while let Some(t) = self.peek() {
            if t.line != first.line || t.text == "{" {
                break;
            }
            name.push(' ');
            name.push_str(t.text);
            self.pos += 1;
        }
        Ok(name)
    }

    fn number(&mut self) -> Result<f64> {
        let tok = self.next("a number")?;
        parse_real(tok.text, tok.line)
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> BvhError {
    BvhError::MalformedHierarchy {
        line,
        reason: reason.into(),
    }
}

fn parse_real(text: &str, line: usize) -> Result<f64> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(BvhError::NonNumericValue {
            line,
            token: text.to_owned(),
        }),
    }
}

/// Parse a complete BVH document.
///
/// The returned clip is unlabeled, real, and has an empty source id.
pub fn parse_bvh(text: &str) -> Result<(Skeleton, MotionClip)> {
    let lines: Vec<&str> = text.lines().collect();
    let motion_line = lines
        .iter()
        .position(|l| l.trim().eq_ignore_ascii_case("MOTION"))
        .ok_or_else(|| malformed(lines.len().max(1), "missing MOTION section"))?;

    let mut tokens = Vec::new();
    for (i, line) in lines[..motion_line].iter().enumerate() {
        tokens.extend(line.split_whitespace().map(|text| Token { text, line: i + 1 }));
    }
    let mut cursor = Cursor {
        tokens,
        pos: 0,
        last_line: motion_line.max(1),
    };

    cursor.expect("HIERARCHY")?;
    cursor.expect("ROOT")?;
    let root = parse_joint_body(&mut cursor)?;
    if let Some(t) = cursor.peek() {
        return Err(malformed(t.line, format!("unexpected `{}` after root joint", t.text)));
    }
    let skeleton = Skeleton::new(root);

    let clip = parse_motion(&lines, motion_line, skeleton.total_channels)?;
    Ok((skeleton, clip))
}

fn parse_joint_body(cursor: &mut Cursor<'_>) -> Result<Joint> {
    let name = cursor.rest_of_line()?;
    cursor.expect("{")?;
    cursor.expect("OFFSET")?;
    let offset = [cursor.number()?, cursor.number()?, cursor.number()?];

    let channels_tok = cursor.next("CHANNELS")?;
    if !channels_tok.text.eq_ignore_ascii_case("CHANNELS") {
        return Err(malformed(
            channels_tok.line,
            format!("joint `{name}` is missing CHANNELS"),
        ));
    }
    let count_tok = cursor.next("a channel count")?;
    let count: usize = count_tok
        .text
        .parse()
        .map_err(|_| malformed(count_tok.line, format!("bad channel count `{}`", count_tok.text)))?;
    let mut channels = Vec::with_capacity(count);
    for _ in 0..count {
        let tok = cursor.next("a channel name")?;
        let channel = tok
            .text
            .parse::<Channel>()
            .map_err(|_| malformed(tok.line, format!("unknown channel `{}`", tok.text)))?;
        channels.push(channel);
    }

    let mut joint = Joint::new(name, offset, channels);
    loop {
        let tok = cursor.next("`}`")?;
        match tok.text {
            "}" => return Ok(joint),
            t if t.eq_ignore_ascii_case("JOINT") => {
                joint.children.push(parse_joint_body(cursor)?);
            }
            t if t.eq_ignore_ascii_case("End") => {
                cursor.expect("Site")?;
                cursor.expect("{")?;
                cursor.expect("OFFSET")?;
                let offset = [cursor.number()?, cursor.number()?, cursor.number()?];
                cursor.expect("}")?;
                joint.children.push(Joint::end_site(&joint.name, offset));
            }
            other => {
                return Err(malformed(
                    tok.line,
                    format!("unexpected `{other}` inside joint `{}`", joint.name),
                ))
            }
        }
    }
}

fn parse_motion(lines: &[&str], motion_line: usize, channels: usize) -> Result<MotionClip> {
    let mut rest = lines
        .iter()
        .enumerate()
        .skip(motion_line + 1)
        .filter(|(_, l)| !l.trim().is_empty());

    let (idx, frames_line) = rest
        .next()
        .ok_or_else(|| malformed(motion_line + 1, "missing `Frames:` line"))?;
    let declared = header_value(frames_line, &["Frames:"], idx + 1)?;
    let declared: usize = declared.parse().map_err(|_| BvhError::NonNumericValue {
        line: idx + 1,
        token: declared.to_owned(),
    })?;

    let (idx, time_line) = rest
        .next()
        .ok_or_else(|| malformed(idx + 1, "missing `Frame Time:` line"))?;
    let frame_time = header_value(time_line, &["Frame", "Time:"], idx + 1)?;
    let frame_time = parse_real(frame_time, idx + 1)?;
    if frame_time <= 0.0 {
        return Err(malformed(idx + 1, "frame time must be positive"));
    }

    let mut frames = Vec::with_capacity(declared);
    for (idx, line) in rest {
        let row = line
            .split_whitespace()
            .map(|t| parse_real(t, idx + 1))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != channels {
            return Err(BvhError::ChannelArityMismatch {
                line: idx + 1,
                frame: frames.len(),
                expected: channels,
                found: row.len(),
            });
        }
        frames.push(row);
    }
    if frames.len() != declared || declared == 0 {
        return Err(BvhError::FrameCountMismatch {
            declared,
            actual: frames.len(),
        });
    }
    Ok(MotionClip::new(frame_time, frames))
}

/// Value following a header keyword sequence such as `Frame Time:`.
fn header_value<'a>(line: &'a str, keywords: &[&str], line_no: usize) -> Result<&'a str> {
    let mut parts = line.split_whitespace();
    for kw in keywords {
        match parts.next() {
            Some(p) if p.eq_ignore_ascii_case(kw) => {}
            _ => return Err(malformed(line_no, format!("expected `{}`", keywords.join(" ")))),
        }
    }
    match (parts.next(), parts.next()) {
        (Some(v), None) => Ok(v),
        _ => Err(malformed(line_no, format!("expected one value after `{}`", keywords.join(" ")))),
    }
}

fn push_fixed(out: &mut String, v: f64, digits: usize) {
    let start = out.len();
    let _ = write!(out, "{v:.digits$}");
    // "-0.000000" re-parses fine but reads badly.
    if out[start..].starts_with('-') && out[start + 1..].bytes().all(|b| b == b'0' || b == b'.') {
        out.remove(start);
    }
}

/// Serialize to BVH text, 6 fractional digits per value.
pub fn write_bvh(skeleton: &Skeleton, clip: &MotionClip) -> Result<String> {
    for (frame, row) in clip.frames.iter().enumerate() {
        if row.len() != skeleton.total_channels {
            return Err(BvhError::ChannelArityMismatch {
                line: 0,
                frame,
                expected: skeleton.total_channels,
                found: row.len(),
            });
        }
    }

    let mut out = String::with_capacity(64 * skeleton.joint_count() + 12 * clip.frames.len() * skeleton.total_channels);
    out.push_str("HIERARCHY\n");
    write_joint(&mut out, &skeleton.root, 0, true);
    out.push_str("MOTION\n");
    let _ = writeln!(out, "Frames: {}", clip.frames.len());
    out.push_str("Frame Time: ");
    push_fixed(&mut out, clip.frame_time, 7);
    out.push('\n');
    for row in &clip.frames {
        for (i, &v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            push_fixed(&mut out, v, 6);
        }
        out.push('\n');
    }
    Ok(out)
}

fn write_joint(out: &mut String, joint: &Joint, depth: usize, is_root: bool) {
    let indent = "\t".repeat(depth);
    if joint.is_end_site {
        let _ = writeln!(out, "{indent}End Site");
    } else if is_root {
        let _ = writeln!(out, "{indent}ROOT {}", joint.name);
    } else {
        let _ = writeln!(out, "{indent}JOINT {}", joint.name);
    }
    let _ = writeln!(out, "{indent}{{");
    let _ = write!(out, "{indent}\tOFFSET");
    for v in joint.offset {
        out.push(' ');
        push_fixed(out, v, 6);
    }
    out.push('\n');
    if !joint.is_end_site {
        let _ = write!(out, "{indent}\tCHANNELS {}", joint.channels.len());
        for c in &joint.channels {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
    }
    for child in &joint.children {
        write_joint(out, child, depth + 1, false);
    }
    let _ = writeln!(out, "{indent}}}");
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoFrames,
    NonPositiveFrameTime { frame_time: f64 },
    ChannelArityMismatch { frame: usize, expected: usize, found: usize },
    NonFinite { frame: usize, col: usize },
    EndSiteHasChannels { joint: String },
    EndSiteHasChildren { joint: String },
    ChannelTotalMismatch { declared: usize, counted: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoFrames => write!(f, "clip has no frames"),
            Violation::NonPositiveFrameTime { frame_time } => {
                write!(f, "frame time {frame_time} is not positive")
            }
            Violation::ChannelArityMismatch { frame, expected, found } => {
                write!(f, "frame {frame} has {found} values, expected {expected}")
            }
            Violation::NonFinite { frame, col } => write!(f, "non-finite value at frame {frame}, column {col}"),
            Violation::EndSiteHasChannels { joint } => write!(f, "end site `{joint}` has channels"),
            Violation::EndSiteHasChildren { joint } => write!(f, "end site `{joint}` has children"),
            Violation::ChannelTotalMismatch { declared, counted } => {
                write!(f, "skeleton declares {declared} channels but joints carry {counted}")
            }
        }
    }
}

/// Check every structural invariant; an empty list means the pair is valid.
pub fn validate(skeleton: &Skeleton, clip: &MotionClip) -> Vec<Violation> {
    let mut out = Vec::new();
    let counted: usize = skeleton.joint_index.iter().map(|e| e.channels.len()).sum();
    if counted != skeleton.total_channels {
        out.push(Violation::ChannelTotalMismatch {
            declared: skeleton.total_channels,
            counted,
        });
    }
    check_end_sites(&skeleton.root, &mut out);

    if !(clip.frame_time > 0.0) {
        out.push(Violation::NonPositiveFrameTime {
            frame_time: clip.frame_time,
        });
    }
    if clip.frames.is_empty() {
        out.push(Violation::NoFrames);
    }
    for (frame, row) in clip.frames.iter().enumerate() {
        if row.len() != skeleton.total_channels {
            out.push(Violation::ChannelArityMismatch {
                frame,
                expected: skeleton.total_channels,
                found: row.len(),
            });
        }
        for (col, v) in row.iter().enumerate() {
            if !v.is_finite() {
                out.push(Violation::NonFinite { frame, col });
            }
        }
    }
    out
}

fn check_end_sites(joint: &Joint, out: &mut Vec<Violation>) {
    if joint.is_end_site {
        if !joint.channels.is_empty() {
            out.push(Violation::EndSiteHasChannels {
                joint: joint.name.clone(),
            });
        }
        if !joint.children.is_empty() {
            out.push(Violation::EndSiteHasChildren {
                joint: joint.name.clone(),
            });
        }
    }
    for c in &joint.children {
        check_end_sites(c, out);
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const THREE_JOINT: &str = "HIERARCHY
ROOT Hips
{
  OFFSET 0.0 0.0 0.0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Chest
  {
    OFFSET 0.0 1.0 0.0
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0.0 1.0 0.0
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.0166667
0 0 0 0 0 0 0 0 0
0 0 0 0 0 0 0 0 0
";

    #[test]
    fn parses_three_joint_fixture() {
        let (sk, clip) = parse_bvh(THREE_JOINT).unwrap();
        assert_eq!(sk.total_channels, 9);
        assert_eq!(sk.joint_count(), 3);
        assert_eq!(sk.joint_index[2].name, "Chest_end");
        assert!(sk.joint_index[2].is_end_site);
        assert_eq!(sk.joint_index[1].channel_offset, 6);
        assert_eq!(clip.frame_count(), 2);
        assert!(clip.frames.iter().flatten().all(|&v| v == 0.0));
        assert!((clip.frame_time - 1.0 / 60.0).abs() < 1e-6);
        assert!(validate(&sk, &clip).is_empty());
    }

    #[test]
    fn crlf_and_tabs_accepted() {
        let text = THREE_JOINT.replace('\n', "\r\n").replace("  ", "\t");
        let (sk, clip) = parse_bvh(&text).unwrap();
        assert_eq!(sk.total_channels, 9);
        assert_eq!(clip.frame_count(), 2);
    }

    fn full_body_text(frames: usize) -> String {
        let mut s = String::from("HIERARCHY\nROOT Pelvis\n{\nOFFSET 0 0 0\nCHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation\n");
        for j in 0..27 {
            s.push_str(&format!("JOINT J{j}\n{{\nOFFSET 0 1 0\nCHANNELS 3 Zrotation Yrotation Xrotation\n"));
        }
        s.push_str("End Site\n{\nOFFSET 0 1 0\n}\n");
        for _ in 0..28 {
            s.push_str("}\n");
        }
        s.push_str(&format!("MOTION\nFrames: {frames}\nFrame Time: 0.0166667\n"));
        for f in 0..frames {
            let row: Vec<String> = (0..87).map(|c| format!("{}", (f * 87 + c) as f64 * 0.25)).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    #[test]
    fn full_body_channel_count() {
        let (sk, clip) = parse_bvh(&full_body_text(3)).unwrap();
        // 6 root channels plus 27 three-channel joints.
        assert_eq!(sk.total_channels, 6 + 27 * 3);
        assert_eq!(sk.joint_index.iter().filter(|j| !j.is_end_site).count(), 28);
        assert!(clip.frames.iter().all(|r| r.len() == 87));
    }

    #[test]
    fn zero_channel_joint_accepted() {
        let text = "HIERARCHY\nROOT A\n{\nOFFSET 0 0 0\nCHANNELS 1 Xrotation\nJOINT B\n{\nOFFSET 1 0 0\nCHANNELS 0\n}\n}\nMOTION\nFrames: 1\nFrame Time: 0.1\n5\n";
        let (sk, clip) = parse_bvh(text).unwrap();
        assert_eq!(sk.total_channels, 1);
        assert!(sk.joint_index[1].channels.is_empty());
        assert_eq!(clip.frames, vec![vec![5.0]]);
    }

    #[test]
    fn channel_order_preserved() {
        let (sk, _) = parse_bvh(&full_body_text(1)).unwrap();
        assert_eq!(
            sk.root.channels[3..],
            [Channel::Zrotation, Channel::Yrotation, Channel::Xrotation]
        );
    }

    #[test]
    fn unbalanced_braces() {
        let text = THREE_JOINT.replacen("    }\n  }\n}", "    }\n  }", 1);
        assert!(matches!(parse_bvh(&text), Err(BvhError::MalformedHierarchy { .. })));
    }

    #[test]
    fn missing_offset() {
        let text = THREE_JOINT.replacen("    OFFSET 0.0 1.0 0.0\n    CHANNELS", "    CHANNELS", 1);
        match parse_bvh(&text) {
            Err(BvhError::MalformedHierarchy { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_channels() {
        let text = THREE_JOINT.replacen("    CHANNELS 3 Zrotation Xrotation Yrotation\n", "", 1);
        assert!(matches!(parse_bvh(&text), Err(BvhError::MalformedHierarchy { .. })));
    }

    #[test]
    fn frame_count_mismatch() {
        let text = THREE_JOINT.replace("Frames: 2", "Frames: 3");
        assert_eq!(
            parse_bvh(&text),
            Err(BvhError::FrameCountMismatch { declared: 3, actual: 2 })
        );
    }

    #[test]
    fn row_arity_mismatch_names_line() {
        let text = THREE_JOINT.replacen("0 0 0 0 0 0 0 0 0\n", "0 0 0 0 0 0 0 0\n", 1);
        match parse_bvh(&text) {
            Err(BvhError::ChannelArityMismatch { line, frame, expected, found }) => {
                assert_eq!((line, frame, expected, found), (19, 0, 9, 8));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_numeric_value() {
        let text = THREE_JOINT.replacen("0 0 0 0 0 0 0 0 0\n", "0 0 0 abc 0 0 0 0 0\n", 1);
        assert_eq!(
            parse_bvh(&text),
            Err(BvhError::NonNumericValue { line: 19, token: "abc".into() })
        );
    }

    #[test]
    fn round_trip_fixture() {
        let (sk, clip) = parse_bvh(THREE_JOINT).unwrap();
        let text = write_bvh(&sk, &clip).unwrap();
        let (sk2, clip2) = parse_bvh(&text).unwrap();
        assert_eq!(sk, sk2);
        assert_eq!(clip.frames, clip2.frames);
    }

    #[test]
    fn round_trip_formatting_tolerance() {
        let (sk, mut clip) = parse_bvh(THREE_JOINT).unwrap();
        clip.frames[1][4] = 123.4567891;
        clip.frames[0][0] = -1e-9;
        let text = write_bvh(&sk, &clip).unwrap();
        assert!(text.contains("123.456789"));
        assert!(!text.contains("-0.000000"));
        let (_, back) = parse_bvh(&text).unwrap();
        assert!((back.frames[1][4] - 123.4567891).abs() < 1e-4);
    }

    #[test]
    fn write_rejects_wrong_arity() {
        let (sk, mut clip) = parse_bvh(THREE_JOINT).unwrap();
        clip.frames[1].pop();
        assert!(matches!(
            write_bvh(&sk, &clip),
            Err(BvhError::ChannelArityMismatch { frame: 1, .. })
        ));
    }

    #[test]
    fn validate_reports_injected_defects() {
        let (sk, clip) = parse_bvh(THREE_JOINT).unwrap();
        let mut rows = vec![vec![0.0; 9]; 6];
        rows[5][2] = f64::NAN;
        let bad = clip.with_frames(rows);
        assert_eq!(validate(&sk, &bad), vec![Violation::NonFinite { frame: 5, col: 2 }]);

        let short = clip.with_frames(vec![vec![0.0; 8]]);
        assert_eq!(
            validate(&sk, &short),
            vec![Violation::ChannelArityMismatch { frame: 0, expected: 9, found: 8 }]
        );
    }

    #[test]
    fn label_round_trips_through_strings() {
        for name in ["angry", "depressed", "neutral", "proud", "sneaky"] {
            assert_eq!(Label::from(name).as_str(), name);
        }
        assert!(Label::Angry < Label::Proud);
    }

    proptest! {
        #[test]
        fn parser_never_panics(text in "\\PC{0,400}") {
            let _ = parse_bvh(&text);
        }

        #[test]
        fn truncated_documents_error_cleanly(cut in 0usize..THREE_JOINT.len()) {
            let _ = parse_bvh(&THREE_JOINT[..cut]);
        }

        #[test]
        fn write_parse_round_trip(values in proptest::collection::vec(-1e4f64..1e4, 9 * 3)) {
            let (sk, clip) = parse_bvh(THREE_JOINT).unwrap();
            let clip = clip.with_frames(values.chunks(9).map(<[f64]>::to_vec).collect());
            let (sk2, back) = parse_bvh(&write_bvh(&sk, &clip).unwrap()).unwrap();
            prop_assert_eq!(&sk, &sk2);
            for (a, b) in clip.frames.iter().flatten().zip(back.frames.iter().flatten()) {
                prop_assert!((a - b).abs() <= 1e-4);
            }
        }
    }
}
