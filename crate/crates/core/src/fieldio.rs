//! Versioned binary container for sampled fields and forms.
//!
//! Layout:
//!
//! ```text
//! magic   8 bytes  b"CXFIELD1"
//! hlen    4 bytes  little-endian u32, JSON header length
//! header  hlen bytes, UTF-8 JSON (FieldHeader)
//! payload complex values as little-endian f64 pairs (re, im), in the
//!         storage order of the in-memory type:
//!         unitary:    grid-major N x N row-major blocks
//!         connection: axis 0, 1, 2, each grid-major N x N row-major blocks
//! ```
//!
//! Round trips are bit-exact regardless of platform endianness.

use crate::error::{Error, Result};
use crate::fields::{ConnectionForm, UnitaryField};
use crate::scalar::Real;
use crate::topology::CALIBRATION_TAG;
use crate::Cx;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

const MAGIC: &[u8; 8] = b"CXFIELD1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldHeader {
    pub format_version: u32,
    /// "unitary" or "connection"
    pub kind: String,
    pub n_g: usize,
    pub rank: usize,
    pub scalar: String,
    pub calibration: String,
    /// Collapse-profile parameters when the field came from the standard
    /// construction.
    pub profile_radius: Option<f64>,
    pub profile_sharpness: Option<f64>,
    /// Winding index for constructed gauge fields.
    pub k: Option<i64>,
    /// Anti-Hermitian defect for connection forms.
    pub anti_herm_defect: Option<f64>,
}

impl FieldHeader {
    pub fn unitary<T: Real>(field: &UnitaryField<T>) -> Self {
        FieldHeader {
            format_version: FORMAT_VERSION,
            kind: "unitary".into(),
            n_g: field.n_g,
            rank: field.rank,
            scalar: T::NAME.into(),
            calibration: CALIBRATION_TAG.into(),
            profile_radius: None,
            profile_sharpness: None,
            k: None,
            anti_herm_defect: None,
        }
    }

    pub fn connection<T: Real>(form: &ConnectionForm<T>) -> Self {
        FieldHeader {
            format_version: FORMAT_VERSION,
            kind: "connection".into(),
            n_g: form.n_g,
            rank: form.rank,
            scalar: T::NAME.into(),
            calibration: CALIBRATION_TAG.into(),
            profile_radius: None,
            profile_sharpness: None,
            k: None,
            anti_herm_defect: Some(form.anti_herm_defect.as_f64()),
        }
    }
}

fn write_payload<T: Real, W: Write>(w: &mut W, data: &[Cx<T>]) -> Result<()> {
    let mut buf = Vec::with_capacity(data.len() * 16);
    for z in data {
        buf.extend_from_slice(&z.re.as_f64().to_le_bytes());
        buf.extend_from_slice(&z.im.as_f64().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_payload<T: Real, R: Read>(r: &mut R, len: usize) -> Result<Vec<Cx<T>>> {
    let mut buf = vec![0u8; len * 16];
    r.read_exact(&mut buf)?;
    let mut out = Vec::with_capacity(len);
    for ch in buf.chunks_exact(16) {
        let re = f64::from_le_bytes(ch[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(ch[8..16].try_into().unwrap());
        out.push(Cx::new(T::of(re), T::of(im)));
    }
    Ok(out)
}

fn write_container<W: Write>(w: &mut W, header: &FieldHeader) -> Result<()> {
    let hjson = serde_json::to_vec(header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&(hjson.len() as u32).to_le_bytes())?;
    w.write_all(&hjson)?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<FieldHeader> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut hlen = [0u8; 4];
    r.read_exact(&mut hlen)?;
    let hlen = u32::from_le_bytes(hlen) as usize;
    if hlen > 1 << 20 {
        return Err(Error::Format(format!("implausible header length {hlen}")));
    }
    let mut hjson = vec![0u8; hlen];
    r.read_exact(&mut hjson)?;
    let header: FieldHeader =
        serde_json::from_slice(&hjson).map_err(|e| Error::Format(e.to_string()))?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {}",
            header.format_version
        )));
    }
    Ok(header)
}

pub fn write_unitary<T: Real, W: Write>(
    w: &mut W,
    field: &UnitaryField<T>,
    header: &FieldHeader,
) -> Result<()> {
    write_container(w, header)?;
    write_payload(w, &field.data)
}

pub fn read_unitary<T: Real, R: Read>(r: &mut R) -> Result<(FieldHeader, UnitaryField<T>)> {
    let header = read_header(r)?;
    if header.kind != "unitary" {
        return Err(Error::Format(format!(
            "expected a unitary container, found {}",
            header.kind
        )));
    }
    let len = header.n_g.pow(3) * header.rank * header.rank;
    let data = read_payload::<T, _>(r, len)?;
    Ok((
        header.clone(),
        UnitaryField {
            n_g: header.n_g,
            rank: header.rank,
            data,
        },
    ))
}

pub fn write_connection<T: Real, W: Write>(
    w: &mut W,
    form: &ConnectionForm<T>,
    header: &FieldHeader,
) -> Result<()> {
    write_container(w, header)?;
    for axis in 0..3 {
        write_payload(w, &form.comps[axis])?;
    }
    Ok(())
}

pub fn read_connection<T: Real, R: Read>(r: &mut R) -> Result<(FieldHeader, ConnectionForm<T>)> {
    let header = read_header(r)?;
    if header.kind != "connection" {
        return Err(Error::Format(format!(
            "expected a connection container, found {}",
            header.kind
        )));
    }
    let len = header.n_g.pow(3) * header.rank * header.rank;
    let comps = [
        read_payload::<T, _>(r, len)?,
        read_payload::<T, _>(r, len)?,
        read_payload::<T, _>(r, len)?,
    ];
    Ok((
        header.clone(),
        ConnectionForm {
            n_g: header.n_g,
            rank: header.rank,
            comps,
            anti_herm_defect: T::of(header.anti_herm_defect.unwrap_or(0.0)),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gauge_field, maurer_cartan};
    use crate::profile::CollapseProfile;

    #[test]
    fn unitary_roundtrip_bit_exact() {
        let profile = CollapseProfile::<f64>::default_profile();
        let f = gauge_field::<f64>(2, 4, 2, &profile).unwrap();
        let mut header = FieldHeader::unitary(&f);
        header.k = Some(2);
        header.profile_radius = Some(0.45);
        header.profile_sharpness = Some(1.0);
        let mut buf = Vec::new();
        write_unitary(&mut buf, &f, &header).unwrap();
        let (h2, f2) = read_unitary::<f64, _>(&mut buf.as_slice()).unwrap();
        assert_eq!(header, h2);
        assert_eq!(f.data.len(), f2.data.len());
        for (a, b) in f.data.iter().zip(f2.data.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn connection_roundtrip() {
        let profile = CollapseProfile::<f64>::default_profile();
        let f = gauge_field::<f64>(1, 4, 2, &profile).unwrap();
        let alpha = maurer_cartan(&f).unwrap();
        let header = FieldHeader::connection(&alpha);
        let mut buf = Vec::new();
        write_connection(&mut buf, &alpha, &header).unwrap();
        let (h2, a2) = read_connection::<f64, _>(&mut buf.as_slice()).unwrap();
        assert_eq!(h2.anti_herm_defect, Some(alpha.anti_herm_defect));
        for axis in 0..3 {
            for (a, b) in alpha.comps[axis].iter().zip(a2.comps[axis].iter()) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn corrupt_container_rejected() {
        let mut buf = b"NOTMAGIC".to_vec();
        buf.extend_from_slice(&[0u8; 16]);
        assert!(read_unitary::<f64, _>(&mut buf.as_slice()).is_err());
        // kind mismatch
        let profile = CollapseProfile::<f64>::default_profile();
        let f = gauge_field::<f64>(1, 2, 2, &profile).unwrap();
        let header = FieldHeader::unitary(&f);
        let mut ok = Vec::new();
        write_unitary(&mut ok, &f, &header).unwrap();
        assert!(read_connection::<f64, _>(&mut ok.as_slice()).is_err());
    }
}
