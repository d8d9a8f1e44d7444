//! Model serialization (`.dgla.json`).
//!
//! Top-level fields: `{"kind", "n", "r", "sectors", "tensors", "gram",
//! "band"}`. Abstract models store every tensor as dense nested arrays of
//! `{"re","im"}` pairs. Torus models store the generating Fourier data;
//! construction is deterministic, so load rebuilds the tensors bit-for-bit.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::error::ModelError;
use crate::model::{
    build_model, AbstractConfig, ModelConfig, Pairing, Sector, SparseBilinear, SpectralModel,
};
use crate::scalar::{czero, Real, C};

fn complex_json<R: Real>(z: &C<R>) -> Value {
    json!({"re": z.re.to_f64(), "im": z.im.to_f64()})
}

fn parse_complex<R: Real>(v: &Value, location: &str) -> Result<C<R>, ModelError> {
    let obj = v.as_object().ok_or_else(|| ModelError::Parse {
        location: location.into(),
        message: "expected {re, im} object".into(),
    })?;
    let re = obj
        .get("re")
        .and_then(Value::as_f64)
        .ok_or_else(|| ModelError::Parse {
            location: location.into(),
            message: "missing field `re`".into(),
        })?;
    let im = obj
        .get("im")
        .and_then(Value::as_f64)
        .ok_or_else(|| ModelError::Parse {
            location: location.into(),
            message: "missing field `im`".into(),
        })?;
    Ok(C::new(R::from_f64_lossy(re), R::from_f64_lossy(im)))
}

fn matrix_json<R: Real>(m: &DMatrix<C<R>>) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            let row: Vec<Value> = (0..m.ncols()).map(|j| complex_json(&m[(i, j)])).collect();
            Value::Array(row)
        })
        .collect();
    json!({"rows": m.nrows(), "cols": m.ncols(), "data": rows})
}

fn parse_matrix<R: Real>(v: &Value, location: &str) -> Result<DMatrix<C<R>>, ModelError> {
    let rows = v["rows"].as_u64().ok_or_else(|| ModelError::Parse {
        location: location.into(),
        message: "missing field `rows`".into(),
    })? as usize;
    let cols = v["cols"].as_u64().ok_or_else(|| ModelError::Parse {
        location: location.into(),
        message: "missing field `cols`".into(),
    })? as usize;
    let data = v["data"].as_array().ok_or_else(|| ModelError::Parse {
        location: location.into(),
        message: "missing field `data`".into(),
    })?;
    if data.len() != rows {
        return Err(ModelError::Parse {
            location: location.into(),
            message: format!("expected {rows} rows, found {}", data.len()),
        });
    }
    let mut m = DMatrix::from_element(rows, cols, czero());
    for (i, row) in data.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| ModelError::Parse {
            location: format!("{location}.data[{i}]"),
            message: "expected an array".into(),
        })?;
        if row.len() != cols {
            return Err(ModelError::Parse {
                location: format!("{location}.data[{i}]"),
                message: format!("expected {cols} cols, found {}", row.len()),
            });
        }
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = parse_complex(z, &format!("{location}.data[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn bilinear_json<R: Real>(t: &SparseBilinear<R>) -> Value {
    // Dense nested arrays [out][in1][in2].
    let mut dense =
        vec![vec![vec![czero::<R>(); t.in2_dim]; t.in1_dim]; t.out_dim];
    for &(o, i, j, z) in &t.entries {
        dense[o as usize][i as usize][j as usize] += z;
    }
    let data: Vec<Value> = dense
        .iter()
        .map(|plane| {
            Value::Array(
                plane
                    .iter()
                    .map(|row| Value::Array(row.iter().map(complex_json).collect()))
                    .collect(),
            )
        })
        .collect();
    json!({
        "out": t.out_dim,
        "in1": t.in1_dim,
        "in2": t.in2_dim,
        "data": data,
    })
}

fn parse_bilinear<R: Real>(v: &Value, location: &str) -> Result<SparseBilinear<R>, ModelError> {
    let out_dim = v["out"].as_u64().ok_or_else(|| ModelError::Parse {
        location: location.into(),
        message: "missing field `out`".into(),
    })? as usize;
    let in1 = v["in1"].as_u64().ok_or_else(|| ModelError::Parse {
        location: location.into(),
        message: "missing field `in1`".into(),
    })? as usize;
    let in2 = v["in2"].as_u64().ok_or_else(|| ModelError::Parse {
        location: location.into(),
        message: "missing field `in2`".into(),
    })? as usize;
    let data = v["data"].as_array().ok_or_else(|| ModelError::Parse {
        location: location.into(),
        message: "missing field `data`".into(),
    })?;
    let mut t = SparseBilinear::zero(in1, in2, out_dim);
    if data.len() != out_dim {
        return Err(ModelError::Parse {
            location: location.into(),
            message: format!("expected {out_dim} output planes, found {}", data.len()),
        });
    }
    for (o, plane) in data.iter().enumerate() {
        let plane = plane.as_array().ok_or_else(|| ModelError::Parse {
            location: format!("{location}.data[{o}]"),
            message: "expected an array".into(),
        })?;
        for (i, row) in plane.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| ModelError::Parse {
                location: format!("{location}.data[{o}][{i}]"),
                message: "expected an array".into(),
            })?;
            for (j, z) in row.iter().enumerate() {
                let z = parse_complex::<R>(z, &format!("{location}.data[{o}][{i}][{j}]"))?;
                if crate::scalar::cabs(&z) != 0.0 {
                    t.entries.push((o as u32, i as u32, j as u32, z));
                }
            }
        }
    }
    Ok(t)
}

fn sector_from_key(key: &str, location: &str) -> Result<Sector, ModelError> {
    match key {
        "E" => Ok(Sector::E),
        "Q" => Ok(Sector::Q),
        "T" => Ok(Sector::T),
        other => Err(ModelError::Parse {
            location: location.into(),
            message: format!("unknown sector `{other}`"),
        }),
    }
}

/// Serialize a model to the `.dgla.json` schema.
pub fn save_model<R: Real>(model: &SpectralModel<R>) -> Vec<u8> {
    let mut sectors = Map::new();
    for sector in Sector::ALL {
        let dims: Vec<usize> = (0..=model.n()).map(|q| model.dim(sector, q)).collect();
        sectors.insert(sector.name().into(), json!(dims));
    }

    let value = if let Some(torus) = model.torus_data() {
        let u: Vec<Value> = torus
            .u_modes
            .iter()
            .map(|(m, z)| json!({"k": m, "re": z.re.to_f64(), "im": z.im.to_f64()}))
            .collect();
        let twist: Vec<Value> = torus.twist.iter().map(complex_json).collect();
        json!({
            "kind": "torus",
            "n": model.n(),
            "r": model.rank(),
            "sectors": sectors,
            "tensors": {
                "metric_potential": u,
                "curvature_twist": twist,
            },
            "gram": {"flat": true},
            "band": torus.k_cut,
        })
    } else {
        let ac = model.to_abstract_config();
        let mut dbar = Map::new();
        for sector in Sector::ALL {
            let mats: Vec<Value> = (0..model.n())
                .map(|q| matrix_json(&ac.dbar[&(sector, q)]))
                .collect();
            dbar.insert(sector.name().into(), Value::Array(mats));
        }
        let curvature: Vec<Value> = (0..model.n())
            .map(|p| matrix_json(&ac.curvature[&p]))
            .collect();
        let mut pairings = Map::new();
        for pairing in [Pairing::Conn10, Pairing::BracketQ, Pairing::BracketT] {
            let mut per_deg = Map::new();
            for (&(pk, p, q), t) in &ac.pairings {
                if pk == pairing {
                    per_deg.insert(format!("{p},{q}"), bilinear_json(t));
                }
            }
            pairings.insert(pairing.name().into(), Value::Object(per_deg));
        }
        let mut gram = Map::new();
        for sector in Sector::ALL {
            let mats: Vec<Value> = (0..=model.n())
                .map(|q| matrix_json(&ac.gram[&(sector, q)]))
                .collect();
            gram.insert(sector.name().into(), Value::Array(mats));
        }
        json!({
            "kind": "abstract",
            "n": model.n(),
            "r": model.rank(),
            "sectors": sectors,
            "tensors": {
                "dbar": dbar,
                "curvature_contract": curvature,
                "pairings": pairings,
            },
            "gram": gram,
            "band": Value::Null,
        })
    };
    let mut bytes = serde_json::to_vec_pretty(&value).expect("model JSON");
    bytes.push(b'\n');
    bytes
}

/// Parse a `.dgla.json` payload and rebuild the model.
pub fn load_model<R: Real>(bytes: &[u8]) -> Result<SpectralModel<R>, ModelError> {
    let v: Value = serde_json::from_slice(bytes).map_err(|e| ModelError::Parse {
        location: "json".into(),
        message: e.to_string(),
    })?;
    let cfg = config_from_json(&v)?;
    build_model(&cfg)
}

/// Parse the configuration part of a model file.
pub fn config_from_json<R: Real>(v: &Value) -> Result<ModelConfig<R>, ModelError> {
    let kind = v["kind"].as_str().ok_or_else(|| ModelError::Parse {
        location: "kind".into(),
        message: "missing field `kind`".into(),
    })?;
    let n = v["n"].as_u64().ok_or_else(|| ModelError::Parse {
        location: "n".into(),
        message: "missing field `n`".into(),
    })? as usize;
    let r = v["r"].as_u64().ok_or_else(|| ModelError::Parse {
        location: "r".into(),
        message: "missing field `r`".into(),
    })? as usize;
    match kind {
        "torus" => {
            let band = v["band"].as_u64().ok_or_else(|| ModelError::Parse {
                location: "band".into(),
                message: "missing field `band`".into(),
            })? as u32;
            let mut metric_potential = Vec::new();
            if let Some(arr) = v["tensors"]["metric_potential"].as_array() {
                for (i, e) in arr.iter().enumerate() {
                    let k: Vec<i32> = e["k"]
                        .as_array()
                        .ok_or_else(|| ModelError::Parse {
                            location: format!("tensors.metric_potential[{i}].k"),
                            message: "missing field `k`".into(),
                        })?
                        .iter()
                        .map(|x| x.as_i64().unwrap_or(0) as i32)
                        .collect();
                    let z = parse_complex::<R>(e, &format!("tensors.metric_potential[{i}]"))?;
                    metric_potential.push((k, z));
                }
            }
            let twist_arr = v["tensors"]["curvature_twist"]
                .as_array()
                .ok_or_else(|| ModelError::Parse {
                    location: "tensors.curvature_twist".into(),
                    message: "missing field `curvature_twist`".into(),
                })?;
            let mut curvature_twist = Vec::new();
            for (i, z) in twist_arr.iter().enumerate() {
                curvature_twist.push(parse_complex::<R>(z, &format!("tensors.curvature_twist[{i}]"))?);
            }
            Ok(ModelConfig::Torus {
                n,
                r,
                fourier_cutoff: band,
                metric_potential,
                curvature_twist,
            })
        }
        "abstract" => {
            let sectors = v["sectors"].as_object().ok_or_else(|| ModelError::Parse {
                location: "sectors".into(),
                message: "missing field `sectors`".into(),
            })?;
            let mut dims = BTreeMap::new();
            for (key, val) in sectors {
                let sector = sector_from_key(key, "sectors")?;
                let d: Vec<usize> = val
                    .as_array()
                    .ok_or_else(|| ModelError::Parse {
                        location: format!("sectors.{key}"),
                        message: "expected an array of dims".into(),
                    })?
                    .iter()
                    .map(|x| x.as_u64().unwrap_or(0) as usize)
                    .collect();
                dims.insert(sector, d);
            }
            let mut dbar = BTreeMap::new();
            let dbar_obj = v["tensors"]["dbar"].as_object().ok_or_else(|| ModelError::Parse {
                location: "tensors.dbar".into(),
                message: "missing field `dbar`".into(),
            })?;
            for (key, val) in dbar_obj {
                let sector = sector_from_key(key, "tensors.dbar")?;
                let mats = val.as_array().ok_or_else(|| ModelError::Parse {
                    location: format!("tensors.dbar.{key}"),
                    message: "expected an array of matrices".into(),
                })?;
                for (q, m) in mats.iter().enumerate() {
                    dbar.insert(
                        (sector, q),
                        parse_matrix::<R>(m, &format!("tensors.dbar.{key}[{q}]"))?,
                    );
                }
            }
            let mut curvature = BTreeMap::new();
            let curv = v["tensors"]["curvature_contract"]
                .as_array()
                .ok_or_else(|| ModelError::Parse {
                    location: "tensors.curvature_contract".into(),
                    message: "missing field `curvature_contract`".into(),
                })?;
            for (p, m) in curv.iter().enumerate() {
                curvature.insert(p, parse_matrix::<R>(m, &format!("tensors.curvature_contract[{p}]"))?);
            }
            let mut pairings = BTreeMap::new();
            let pair_obj = v["tensors"]["pairings"]
                .as_object()
                .ok_or_else(|| ModelError::Parse {
                    location: "tensors.pairings".into(),
                    message: "missing field `pairings`".into(),
                })?;
            for (pname, pairing) in [
                ("conn10", Pairing::Conn10),
                ("bracket_Q", Pairing::BracketQ),
                ("bracket_T", Pairing::BracketT),
            ] {
                let per_deg = pair_obj
                    .get(pname)
                    .and_then(Value::as_object)
                    .ok_or_else(|| ModelError::Parse {
                        location: format!("tensors.pairings.{pname}"),
                        message: format!("missing field `{pname}`"),
                    })?;
                for (deg_key, t) in per_deg {
                    let parts: Vec<usize> = deg_key
                        .split(',')
                        .filter_map(|s| s.trim().parse().ok())
                        .collect();
                    if parts.len() != 2 {
                        return Err(ModelError::Parse {
                            location: format!("tensors.pairings.{pname}.{deg_key}"),
                            message: "degree key must be `p,q`".into(),
                        });
                    }
                    pairings.insert(
                        (pairing, parts[0], parts[1]),
                        parse_bilinear::<R>(t, &format!("tensors.pairings.{pname}.{deg_key}"))?,
                    );
                }
            }
            let mut gram = BTreeMap::new();
            let gram_obj = v["gram"].as_object().ok_or_else(|| ModelError::Parse {
                location: "gram".into(),
                message: "missing field `gram`".into(),
            })?;
            for (key, val) in gram_obj {
                let sector = sector_from_key(key, "gram")?;
                let mats = val.as_array().ok_or_else(|| ModelError::Parse {
                    location: format!("gram.{key}"),
                    message: "expected an array of matrices".into(),
                })?;
                for (q, m) in mats.iter().enumerate() {
                    gram.insert((sector, q), parse_matrix::<R>(m, &format!("gram.{key}[{q}]"))?);
                }
            }
            Ok(ModelConfig::Abstract(Box::new(AbstractConfig {
                n,
                r,
                dims,
                dbar,
                curvature,
                pairings,
                gram,
            })))
        }
        other => Err(ModelError::Parse {
            location: "kind".into(),
            message: format!("unknown kind `{other}`"),
        }),
    }
}
