//! Parameter directories: one MBT file per tensor plus `manifest.json`
//! naming each tensor's role and shape.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blocks::{
    ConvBParams, Conv2d, DwConv, HssParams, Linear, LocalBranch, LssParams, Norm, SsmBank,
};
use crate::error::{Error, Result};
use crate::io::{load_tensor, save_tensor};
use crate::pipeline::PipelineParams;
use crate::tensor::Tensor;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "mbt-params/1";

/// Anything holding named tensors.
pub trait Parameters {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Tensor));
    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Tensor));

    fn named_tensors(&self) -> Vec<(String, Tensor)> {
        let mut out = Vec::new();
        self.visit("", &mut |name, t| out.push((name.to_string(), t.clone())));
        out
    }

    fn parameter_count(&self) -> usize {
        let mut n = 0;
        self.visit("", &mut |_, t| n += t.numel());
        n
    }
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

macro_rules! leaf_params {
    ($ty:ty { $($field:ident),+ }) => {
        impl Parameters for $ty {
            fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Tensor)) {
                $( f(&join(prefix, stringify!($field)), &self.$field); )+
            }
            fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Tensor)) {
                $( f(&join(prefix, stringify!($field)), &mut self.$field); )+
            }
        }
    };
}

leaf_params!(Linear { weight, bias });
leaf_params!(Conv2d { weight, bias });
leaf_params!(DwConv { weight, bias });
leaf_params!(Norm { scale, shift });
leaf_params!(SsmBank { a, b, c, delta });

macro_rules! nested_params {
    ($ty:ty { $($field:ident),+ }) => {
        impl Parameters for $ty {
            fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Tensor)) {
                $( self.$field.visit(&join(prefix, stringify!($field)), f); )+
            }
            fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Tensor)) {
                $( self.$field.visit_mut(&join(prefix, stringify!($field)), f); )+
            }
        }
    };
}

nested_params!(ConvBParams { conv, norm });
nested_params!(LocalBranch { conv_in, dw, dw_norm, conv_out });
nested_params!(HssParams { norm, in_proj, gate_proj, dwconv, banks, out_norm, out_proj });
nested_params!(LssParams { hss, branches, fuse });
nested_params!(PipelineParams { hfpn, stages, transitions });

impl<T: Parameters> Parameters for Vec<T> {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &Tensor)) {
        for (i, item) in self.iter().enumerate() {
            item.visit(&join(prefix, &i.to_string()), f);
        }
    }

    fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut Tensor)) {
        for (i, item) in self.iter_mut().enumerate() {
            item.visit_mut(&join(prefix, &i.to_string()), f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub role: String,
    pub shape: Vec<usize>,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamManifest {
    pub format: String,
    pub tensors: Vec<ManifestEntry>,
}

/// Role of a tensor from the last segment of its name.
fn role_of(name: &str) -> &'static str {
    match name.rsplit('.').next().unwrap_or("") {
        "weight" => "weight",
        "bias" => "bias",
        "scale" => "norm_scale",
        "shift" => "norm_shift",
        "a" => "ssm_a",
        "b" => "ssm_b",
        "c" => "ssm_c",
        "delta" => "ssm_delta",
        _ => "tensor",
    }
}

pub fn save_params(dir: impl AsRef<Path>, params: &dyn Parameters) -> Result<ParamManifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = ParamManifest {
        format: MANIFEST_FORMAT.to_string(),
        tensors: Vec::new(),
    };
    let mut first_err = None;
    params.visit("", &mut |name, t| {
        let file = format!("{name}.mbt");
        if first_err.is_none() {
            if let Err(e) = save_tensor(dir.join(&file), t) {
                first_err = Some(e);
            }
        }
        manifest.tensors.push(ManifestEntry {
            name: name.to_string(),
            role: role_of(name).to_string(),
            shape: t.shape().to_vec(),
            file,
        });
    });
    if let Some(e) = first_err {
        return Err(e);
    }
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Overwrites every tensor of `params` from `dir`. The manifest must name
/// exactly the tensors `params` holds, with matching shapes.
pub fn load_params(dir: impl AsRef<Path>, params: &mut dyn Parameters) -> Result<()> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: ParamManifest = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(Error::InvalidParameter(format!(
            "{}: unsupported format {:?}",
            path.display(),
            manifest.format
        )));
    }
    let expected = params.named_tensors();
    if expected.len() != manifest.tensors.len() {
        return Err(Error::InvalidParameter(format!(
            "{}: manifest lists {} tensors, model has {}",
            path.display(),
            manifest.tensors.len(),
            expected.len()
        )));
    }
    let mut loaded = std::collections::HashMap::new();
    for entry in &manifest.tensors {
        let t = load_tensor(dir.join(&entry.file))?;
        if t.shape() != entry.shape.as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "{}: file shape {:?} disagrees with manifest {:?}",
                entry.file,
                t.shape(),
                entry.shape
            )));
        }
        loaded.insert(entry.name.clone(), t);
    }
    let mut err = None;
    params.visit_mut("", &mut |name, slot| {
        if err.is_some() {
            return;
        }
        match loaded.remove(name) {
            Some(t) if t.shape() == slot.shape() => *slot = t,
            Some(t) => {
                err = Some(Error::ShapeMismatch(format!(
                    "{name}: expected shape {:?}, found {:?}",
                    slot.shape(),
                    t.shape()
                )))
            }
            None => err = Some(Error::InvalidParameter(format!("{name}: missing from manifest"))),
        }
    });
    err.map_or(Ok(()), Err)
}
