//! Model-side commands: rnn, pfa and tf.

use anyhow::{bail, Context, Result};
use serde_json::Value;
use verinet::seq::{
    heaviside_rnn_emptiness, parse_bits, pcp_to_pfa, pfa_complement, pfa_convex, pfa_letterize, pfa_product,
    pfa_prune, pfa_square_trick, pfa_to_rnn, Morphism, OneHotCodec, Pfa, Rnn,
};
use verinet::transformer::{
    build_argmax_transformer, build_dyck_recognizer, build_sorted_recognizer, EncoderOnlyTransformer, Transformer,
    Translation,
};
use verinet::Rational;

use crate::io::{self, read_source};
use crate::report::Answer;
use crate::{ClosureOp, Example, PfaCmd, RnnCmd, Run, TfCmd};

fn artifact<T: serde::Serialize>(x: &T) -> Result<Answer> {
    Ok(Answer::Artifact(serde_json::to_value(x)?))
}

/// Input positions: a word under one-hot encoding when an alphabet is given,
/// otherwise a sequence of vectors.
fn sequence(alphabet: Option<&str>, text: &str) -> Result<Vec<Vec<Rational>>> {
    match alphabet {
        Some(a) => {
            let codec = OneHotCodec::new(&io::comma_list(a))?;
            Ok(codec.encode_indices(&io::word(codec.alphabet(), text)?))
        }
        None => io::vectors(text),
    }
}

fn floats(seq: &[Vec<Rational>]) -> Vec<Vec<f64>> {
    seq.iter().map(|v| v.iter().map(Rational::to_f64).collect()).collect()
}

pub fn rnn(run: &mut Run, cmd: RnnCmd) -> Result<(String, Answer)> {
    let mut load = |path: &str| -> Result<Rnn> { Ok(Rnn::from_json(&read_source(path, &mut run.inputs)?)?) };
    Ok(match cmd {
        RnnCmd::Eval { model, input, alphabet, float } => {
            let r = load(&model)?;
            let seq = sequence(alphabet.as_deref(), &input)?;
            let out = if float {
                io::float_text(&r.s2v_f64(&floats(&seq))?)
            } else {
                io::vector_text(&r.s2v(&seq).context("exact evaluation failed; try --float")?)
            };
            ("rnn eval".into(), Answer::Value(out))
        }
        RnnCmd::Classify { model, input, alphabet, rel, theta } => {
            let r = load(&model)?;
            let seq = sequence(alphabet.as_deref(), &input)?;
            ("rnn classify".into(), Answer::Bool(r.score_relation(&seq, rel, &io::rational(&theta)?)?))
        }
        RnnCmd::EmptyHeaviside { model, alphabet, rel, theta } => {
            let r = load(&model)?;
            let found = heaviside_rnn_emptiness(&r, rel, &io::rational(&theta)?)?;
            if let Some(w) = &found {
                let letters = match &alphabet {
                    Some(a) => io::spell(&io::comma_list(a), w),
                    None => w.iter().map(ToString::to_string).collect(),
                };
                run.witness = Some(Value::Array(letters.into_iter().map(Value::String).collect()));
            }
            ("rnn empty-heaviside".into(), Answer::Bool(found.is_none()))
        }
    })
}

fn morphism(text: &str) -> Result<Morphism> {
    io::comma_list(text).iter().map(|s| Ok(parse_bits(s)?)).collect()
}

pub fn pfa(run: &mut Run, cmd: PfaCmd) -> Result<(String, Answer)> {
    let mut load = |path: &str| -> Result<Pfa> { Ok(Pfa::from_json(&read_source(path, &mut run.inputs)?)?) };
    Ok(match cmd {
        PfaCmd::Eval { file, word } => {
            let a = load(&file)?;
            let w = io::word(a.alphabet(), &word)?;
            ("pfa eval".into(), Answer::Value(a.value(&w)?.to_string()))
        }
        PfaCmd::Closure { op, files, p } => {
            let autos = files.iter().map(|f| load(f)).collect::<Result<Vec<_>>>()?;
            let (need, name) = match op {
                ClosureOp::Complement => (1, "complement"),
                ClosureOp::Convex => (2, "convex"),
                ClosureOp::Product => (2, "product"),
            };
            if autos.len() != need {
                bail!("{name} takes {need} automata, got {}", autos.len());
            }
            let out = match op {
                ClosureOp::Complement => pfa_complement(&autos[0]),
                ClosureOp::Convex => {
                    let p = p.ok_or_else(|| anyhow::anyhow!("convex needs --p"))?;
                    pfa_convex(&io::rational(&p)?, &autos[0], &autos[1])?
                }
                ClosureOp::Product => pfa_product(&autos[0], &autos[1])?,
            };
            (format!("pfa closure {name}"), artifact(&out)?)
        }
        PfaCmd::Letterize { file, prune } => {
            let mut out = pfa_letterize(&load(&file)?);
            if prune {
                out = pfa_prune(&out);
            }
            ("pfa letterize".into(), artifact(&out)?)
        }
        PfaCmd::ToRnn { file, theta } => {
            let r = pfa_to_rnn(&load(&file)?, &io::rational(&theta)?)?;
            ("pfa to-rnn".into(), artifact(&r)?)
        }
        PfaCmd::Pcp { f1, f2, alphabet, square } => {
            run.inputs.add("f1", f1.as_bytes());
            run.inputs.add("f2", f2.as_bytes());
            let mut a = pcp_to_pfa(&io::comma_list(&alphabet), &morphism(&f1)?, &morphism(&f2)?)?;
            if square {
                a = pfa_square_trick(&a)?;
            }
            ("pfa pcp".into(), artifact(&a)?)
        }
    })
}

enum Model {
    Encoder(EncoderOnlyTransformer),
    Seq2Seq(Transformer),
}

fn load_tf(run: &mut Run, path: &str) -> Result<Model> {
    let text = read_source(path, &mut run.inputs)?;
    let kind = io::parse_json(&text)?.get("type").and_then(Value::as_str).map(str::to_owned);
    Ok(match kind.as_deref() {
        Some("encoder-transformer") => Model::Encoder(EncoderOnlyTransformer::from_json(&text)?),
        _ => Model::Seq2Seq(Transformer::from_json(&text)?),
    })
}

pub fn tf(run: &mut Run, cmd: TfCmd) -> Result<(String, Answer)> {
    Ok(match cmd {
        TfCmd::Run { file, input, alphabet, float, max_steps } => {
            run.inputs.add("input", input.as_bytes());
            let answer = match load_tf(run, &file)? {
                Model::Encoder(t) => {
                    let seq = sequence(alphabet.as_deref(), &input)?;
                    let out: Vec<String> = if float {
                        t.s2s_with(&floats(&seq), run.exec)?.iter().map(|v| io::float_text(v)).collect()
                    } else {
                        t.s2s_with(&seq, run.exec)?.iter().map(|v| io::vector_text(v)).collect()
                    };
                    Answer::Sequence(out)
                }
                Model::Seq2Seq(t) => {
                    let w = io::word(&t.source.alphabet, &input)?;
                    let out = if float { t.translate::<f64>(&w, max_steps)? } else { t.translate::<Rational>(&w, max_steps)? };
                    match out {
                        Translation::Output(v) => Answer::Sequence(io::spell(&t.target.alphabet, &v)),
                        Translation::Diverged => Answer::Value("diverged".into()),
                    }
                }
            };
            ("tf run".into(), answer)
        }
        TfCmd::Classify { file, input, alphabet, float, rel, theta } => {
            run.inputs.add("input", input.as_bytes());
            let Model::Encoder(t) = load_tf(run, &file)? else {
                bail!("classify needs an encoder-only transformer");
            };
            let seq = sequence(alphabet.as_deref(), &input)?;
            let answer = match (theta, float) {
                (Some(theta), _) => Answer::Bool(t.lang_member(&seq, rel, &io::rational(&theta)?)?),
                (None, true) => Answer::Value(io::float_text(&t.s2v(&floats(&seq))?)),
                (None, false) => Answer::Value(io::vector_text(&t.s2v(&seq)?)),
            };
            ("tf classify".into(), answer)
        }
        TfCmd::BuildExample { kind } => {
            let t = match kind {
                Example::Argmax => build_argmax_transformer(),
                Example::Sorted => build_sorted_recognizer(),
                Example::Dyck => build_dyck_recognizer(),
            };
            ("tf build-example".into(), artifact(&t)?)
        }
    })
}
