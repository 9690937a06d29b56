//! Scene description files, in the same `key = value` format as pipeline
//! configs:
//!
//! ```text
//! width = 320
//! height = 240
//! nframes = 200
//! seed = 7
//! noise_sigma = 0
//! background = 128,128,128        # or `texture`
//! object.red.color = 220,30,30
//! object.red.size = 40x30
//! object.red.start = 10,10
//! object.red.velocity = 1,0
//! object.red.appear = 0
//! object.red.disappear = 150
//! object.red.pattern = striped    # `solid` (default) or `striped`
//! object.red.stripe_color = 250,220,40
//! person.clerk.box = 0,0,60,120
//! person.clerk.velocity = 0,0
//! ```

use std::path::Path;

use super::{Background, Pattern, SceneObject, ScenePerson, SceneSpec, Span, Track};
use crate::config::{parse_key_values, parse_value, Entry, KeyValueError};
use crate::error::{Error, Result};

fn spec_err(e: KeyValueError) -> Error {
    Error::Spec(e.to_string())
}

fn bad(entry: &Entry, expected: &str) -> Error {
    Error::Spec(format!(
        "line {}: invalid value {:?} for {}; expected {expected}",
        entry.line, entry.value, entry.key
    ))
}

fn ints(entry: &Entry, sep: char, n: usize, expected: &str) -> Result<Vec<i64>> {
    let vals: Vec<i64> = entry
        .value
        .split(sep)
        .map(|p| p.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(entry, expected))?;
    if vals.len() != n {
        return Err(bad(entry, expected));
    }
    Ok(vals)
}

fn rgb(entry: &Entry) -> Result<[u8; 3]> {
    let v = ints(entry, ',', 3, "r,g,b")?;
    let ch = |c: i64| u8::try_from(c).map_err(|_| bad(entry, "r,g,b in 0..=255"));
    Ok([ch(v[0])?, ch(v[1])?, ch(v[2])?])
}

fn pair(entry: &Entry, sep: char, expected: &str) -> Result<(i64, i64)> {
    let v = ints(entry, sep, 2, expected)?;
    Ok((v[0], v[1]))
}

fn size(entry: &Entry) -> Result<(u32, u32)> {
    let (w, h) = pair(entry, 'x', "WxH")?;
    let dim = |v: i64| u32::try_from(v).ok().filter(|&v| v > 0).ok_or_else(|| bad(entry, "positive WxH"));
    Ok((dim(w)?, dim(h)?))
}

#[derive(Default)]
struct ObjectDraft {
    color: Option<[u8; 3]>,
    size: Option<(u32, u32)>,
    start: Option<(i64, i64)>,
    velocity: (i64, i64),
    appear: u64,
    disappear: Option<u64>,
    striped: bool,
    stripe_color: Option<[u8; 3]>,
}

#[derive(Default)]
struct PersonDraft {
    bbox: Option<(i64, i64, u32, u32)>,
    velocity: (i64, i64),
    appear: u64,
    disappear: Option<u64>,
}

fn draft<'a, T: Default>(list: &'a mut Vec<(String, T)>, name: &str) -> &'a mut T {
    let idx = match list.iter().position(|(n, _)| n == name) {
        Some(i) => i,
        None => {
            list.push((name.to_string(), T::default()));
            list.len() - 1
        }
    };
    &mut list[idx].1
}

pub fn parse_scene(text: &str) -> Result<SceneSpec> {
    let entries = parse_key_values(text).map_err(spec_err)?;
    let mut width = None;
    let mut height = None;
    let mut nframes = None;
    let mut spec = SceneSpec::new(1, 1, 0);
    let mut objects: Vec<(String, ObjectDraft)> = Vec::new();
    let mut persons: Vec<(String, PersonDraft)> = Vec::new();

    for e in &entries {
        match e.key.as_str() {
            "width" => width = Some(parse_value::<usize>(e).map_err(spec_err)?),
            "height" => height = Some(parse_value::<usize>(e).map_err(spec_err)?),
            "nframes" => nframes = Some(parse_value::<u64>(e).map_err(spec_err)?),
            "fps" => spec.fps = parse_value(e).map_err(spec_err)?,
            "seed" => spec.seed = parse_value(e).map_err(spec_err)?,
            "noise_sigma" => spec.noise_sigma = parse_value(e).map_err(spec_err)?,
            "background" => {
                spec.background = if e.value == "texture" {
                    Background::Texture
                } else {
                    Background::Solid(rgb(e)?)
                }
            }
            key => {
                let (kind, rest) = key.split_once('.').unwrap_or((key, ""));
                let Some((name, field)) = rest.rsplit_once('.') else {
                    return Err(Error::Spec(format!("line {}: unknown key {key:?}", e.line)));
                };
                match kind {
                    "object" => {
                        let d = draft(&mut objects, name);
                        match field {
                            "color" => d.color = Some(rgb(e)?),
                            "size" => d.size = Some(size(e)?),
                            "start" => d.start = Some(pair(e, ',', "x,y")?),
                            "velocity" => d.velocity = pair(e, ',', "dx,dy")?,
                            "appear" => d.appear = parse_value(e).map_err(spec_err)?,
                            "disappear" => d.disappear = Some(parse_value(e).map_err(spec_err)?),
                            "pattern" => {
                                d.striped = match e.value.as_str() {
                                    "solid" => false,
                                    "striped" => true,
                                    _ => return Err(bad(e, "solid or striped")),
                                }
                            }
                            "stripe_color" => d.stripe_color = Some(rgb(e)?),
                            _ => {
                                return Err(Error::Spec(format!(
                                    "line {}: unknown object field {field:?}",
                                    e.line
                                )))
                            }
                        }
                    }
                    "person" => {
                        let d = draft(&mut persons, name);
                        match field {
                            "box" => {
                                let v = ints(e, ',', 4, "x,y,w,h")?;
                                let dim = |v: i64| {
                                    u32::try_from(v)
                                        .ok()
                                        .filter(|&v| v > 0)
                                        .ok_or_else(|| bad(e, "x,y,w,h with positive w,h"))
                                };
                                d.bbox = Some((v[0], v[1], dim(v[2])?, dim(v[3])?));
                            }
                            "velocity" => d.velocity = pair(e, ',', "dx,dy")?,
                            "appear" => d.appear = parse_value(e).map_err(spec_err)?,
                            "disappear" => d.disappear = Some(parse_value(e).map_err(spec_err)?),
                            _ => {
                                return Err(Error::Spec(format!(
                                    "line {}: unknown person field {field:?}",
                                    e.line
                                )))
                            }
                        }
                    }
                    _ => return Err(Error::Spec(format!("line {}: unknown key {key:?}", e.line))),
                }
            }
        }
    }

    let missing = |what: &str| Error::Spec(format!("missing required key {what}"));
    spec.width = width.ok_or_else(|| missing("width"))?;
    spec.height = height.ok_or_else(|| missing("height"))?;
    spec.nframes = nframes.ok_or_else(|| missing("nframes"))?;

    for (name, d) in objects {
        let need = |what: &str| Error::Spec(format!("object {name}: missing {what}"));
        let pattern = if d.striped {
            Pattern::Striped(d.stripe_color.ok_or_else(|| need("stripe_color"))?)
        } else {
            Pattern::Solid
        };
        spec.objects.push(SceneObject {
            color: d.color.ok_or_else(|| need("color"))?,
            pattern,
            track: Track {
                start: d.start.ok_or_else(|| need("start"))?,
                size: d.size.ok_or_else(|| need("size"))?,
                velocity: d.velocity,
                span: Span {
                    appear: d.appear,
                    disappear: d.disappear,
                },
            },
            name,
        });
    }
    for (name, d) in persons {
        let (x, y, w, h) = d
            .bbox
            .ok_or_else(|| Error::Spec(format!("person {name}: missing box")))?;
        spec.persons.push(ScenePerson {
            track: Track {
                start: (x, y),
                size: (w, h),
                velocity: d.velocity,
                span: Span {
                    appear: d.appear,
                    disappear: d.disappear,
                },
            },
            name,
        });
    }
    spec.validate()?;
    Ok(spec)
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
    parse_scene(&text)
}
