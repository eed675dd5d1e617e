use std::io::{Read, Write};

use super::{Agent, AgentConfig, AgentKind, ControlEncoding, DmsoaAgent, OsmboaAgent};
use crate::neural::checkpoint::{read_f64, read_u32};
use crate::neural::{read_params, write_params, ParamSet, Role};
use crate::{Error, Result};

pub const AGENT_MAGIC: &[u8; 8] = b"FRLAGENT";
const VERSION: u32 = 1;

/// Everything needed to rebuild a greedy policy.
///
/// Layout (little-endian): magic, u32 version, u32 kind, u32 name length,
/// name bytes, u32 obs_dim, u32 n_actions, u32 max_repeat, u32 memory_window,
/// f64 gamma, u32 encoding, u32 scale length, f64 scales, u32 net count,
/// then each online network in the parameter checkpoint format.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSnapshot {
    pub kind: AgentKind,
    pub env_name: String,
    pub obs_dim: usize,
    pub n_actions: usize,
    pub max_repeat: usize,
    pub memory_window: usize,
    pub gamma: f64,
    pub encoding: ControlEncoding,
    pub input_scale: Option<Vec<f64>>,
    pub nets: Vec<ParamSet>,
}

fn put_u32(w: &mut dyn Write, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Checkpoint(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

impl AgentSnapshot {
    pub fn write(&self, w: &mut dyn Write) -> Result<()> {
        w.write_all(AGENT_MAGIC)?;
        put_u32(w, VERSION as usize)?;
        put_u32(w, match self.kind { AgentKind::Dmsoa => 0, AgentKind::Osmboa => 1 })?;
        put_u32(w, self.env_name.len())?;
        w.write_all(self.env_name.as_bytes())?;
        for v in [self.obs_dim, self.n_actions, self.max_repeat, self.memory_window] {
            put_u32(w, v)?;
        }
        w.write_all(&self.gamma.to_le_bytes())?;
        put_u32(w, match self.encoding { ControlEncoding::Scalar => 0, ControlEncoding::OneHot => 1 })?;
        let scale = self.input_scale.as_deref().unwrap_or(&[]);
        put_u32(w, scale.len())?;
        for s in scale {
            w.write_all(&s.to_le_bytes())?;
        }
        put_u32(w, self.nets.len())?;
        let mut buf = Vec::new();
        for net in &self.nets {
            write_params(net, &mut buf)?;
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Checkpoint("truncated header".into()))?;
        if &magic != AGENT_MAGIC {
            return Err(Error::Checkpoint("not an agent checkpoint".into()));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let kind = match read_u32(r)? {
            0 => AgentKind::Dmsoa,
            1 => AgentKind::Osmboa,
            k => return Err(Error::Checkpoint(format!("unknown agent kind {k}"))),
        };
        let name_len = read_u32(r)? as usize;
        if name_len > 256 {
            return Err(Error::Checkpoint("environment name too long".into()));
        }
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)
            .map_err(|_| Error::Checkpoint("truncated environment name".into()))?;
        let env_name = String::from_utf8(name).map_err(|_| Error::Checkpoint("environment name is not utf-8".into()))?;
        let obs_dim = read_u32(r)? as usize;
        let n_actions = read_u32(r)? as usize;
        let max_repeat = read_u32(r)? as usize;
        let memory_window = read_u32(r)? as usize;
        let gamma = read_f64(r)?;
        let encoding = match read_u32(r)? {
            0 => ControlEncoding::Scalar,
            1 => ControlEncoding::OneHot,
            e => return Err(Error::Checkpoint(format!("unknown encoding {e}"))),
        };
        let n_scale = read_u32(r)? as usize;
        if n_scale > 1 << 16 {
            return Err(Error::Checkpoint("input scale too long".into()));
        }
        let input_scale = if n_scale == 0 {
            None
        } else {
            Some((0..n_scale).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?)
        };
        let n_nets = read_u32(r)? as usize;
        if n_nets > 2 {
            return Err(Error::Checkpoint(format!("unexpected network count {n_nets}")));
        }
        let nets = (0..n_nets)
            .map(|_| read_params(r, Role::Online))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind,
            env_name,
            obs_dim,
            n_actions,
            max_repeat,
            memory_window,
            gamma,
            encoding,
            input_scale,
            nets,
        })
    }

    /// Rebuilds an agent whose greedy policy matches the saved networks.
    pub fn into_agent(&self, cfg: &AgentConfig) -> Result<Box<dyn Agent>> {
        Ok(match self.kind {
            AgentKind::Dmsoa => Box::new(DmsoaAgent::from_snapshot(self, cfg)?),
            AgentKind::Osmboa => Box::new(OsmboaAgent::from_snapshot(self, cfg)?),
        })
    }
}

pub fn load_agent<R: Read>(r: &mut R, cfg: &AgentConfig) -> Result<(Box<dyn Agent>, AgentSnapshot)> {
    let snap = AgentSnapshot::read(r)?;
    Ok((snap.into_agent(cfg)?, snap))
}
