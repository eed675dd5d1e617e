use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::qnet::{argmax, QNetwork, QNetworkOptions};
use super::{Agent, AgentConfig, AgentKind, AgentSnapshot, BoxedAcNomdp};
use crate::acnomdp::{CostedTransition, ObservationPacket, SkipDecision};
use crate::replay::{Experience, PrioritizedReplay};
use crate::{Error, Result};

/// Control network over actions plus a measurement network over repeat
/// counts, conditioned on the chosen action.
#[derive(Debug, Clone)]
pub struct DmsoaAgent {
    cfg: AgentConfig,
    env_name: String,
    obs_dim: usize,
    n_actions: usize,
    max_repeat: usize,
    gamma: f64,
    qc: QNetwork,
    qm: QNetwork,
    replay: PrioritizedReplay<Experience>,
    rng: ChaCha8Rng,
    decisions: u64,
    updates: u64,
    last_loss: Option<(f64, f64)>,
}

impl DmsoaAgent {
    pub fn new(cfg: &AgentConfig, env: &BoxedAcNomdp, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let d = env.descriptor();
        let w = env.config();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = QNetworkOptions {
            hidden: cfg.hidden.clone(),
            activation: cfg.activation,
            optimizer: cfg.optimizer,
            lr: cfg.lr,
            loss: cfg.loss,
            grad_clip: cfg.grad_clip,
        };
        let qc = QNetwork::new(d.obs_dim, d.n_actions, &opts, &mut rng)?;
        let qm = QNetwork::new(
            d.obs_dim + cfg.encoding.width(d.n_actions),
            w.max_repeat,
            &opts,
            &mut rng,
        )?;
        Ok(Self {
            cfg: cfg.clone(),
            env_name: env.env().name(),
            obs_dim: d.obs_dim,
            n_actions: d.n_actions,
            max_repeat: w.max_repeat,
            gamma: w.reward.gamma,
            qc,
            qm,
            replay: PrioritizedReplay::new(cfg.replay),
            rng,
            decisions: 0,
            updates: 0,
            last_loss: None,
        })
    }

    pub(crate) fn from_snapshot(s: &AgentSnapshot, cfg: &AgentConfig) -> Result<Self> {
        let [c, m] = s.nets.as_slice() else {
            return Err(Error::Checkpoint(format!("dmsoa expects 2 networks, found {}", s.nets.len())));
        };
        let mk = |p: &crate::neural::ParamSet| QNetwork::from_online(p.clone(), cfg.optimizer, cfg.lr, cfg.loss, cfg.grad_clip);
        Ok(Self {
            cfg: AgentConfig { input_scale: s.input_scale.clone(), encoding: s.encoding, ..cfg.clone() },
            env_name: s.env_name.clone(),
            obs_dim: s.obs_dim,
            n_actions: s.n_actions,
            max_repeat: s.max_repeat,
            gamma: s.gamma,
            qc: mk(c),
            qm: mk(m),
            replay: PrioritizedReplay::new(cfg.replay),
            rng: ChaCha8Rng::seed_from_u64(0),
            decisions: 0,
            updates: 0,
            last_loss: None,
        })
    }

    pub fn control_net(&self) -> &QNetwork {
        &self.qc
    }

    pub fn control_net_mut(&mut self) -> &mut QNetwork {
        &mut self.qc
    }

    pub fn measure_net(&self) -> &QNetwork {
        &self.qm
    }

    pub fn measure_net_mut(&mut self) -> &mut QNetwork {
        &mut self.qm
    }

    pub fn replay(&self) -> &PrioritizedReplay<Experience> {
        &self.replay
    }

    /// Gradient updates performed so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Losses `(control, measure)` of the most recent update.
    pub fn last_loss(&self) -> Option<(f64, f64)> {
        self.last_loss
    }

    fn features(&self, packet: &ObservationPacket) -> Result<Vec<f64>> {
        if !packet.fresh {
            return Err(Error::StaleObservation);
        }
        let mut x = Vec::with_capacity(self.obs_dim + self.n_actions);
        self.cfg.scale_into(&packet.values(self.obs_dim), &mut x);
        Ok(x)
    }

    fn measure_input(&self, x: &[f64], control: usize) -> Vec<f64> {
        let mut xm = Vec::with_capacity(x.len() + self.n_actions);
        xm.extend_from_slice(x);
        self.cfg.encoding.append(control, self.n_actions, &mut xm);
        xm
    }

    /// Epsilon-greedy decision; greedy ties go to the lowest index.
    pub fn act_with(&mut self, packet: &ObservationPacket, eps_c: f64, eps_m: f64) -> Result<SkipDecision> {
        let x = self.features(packet)?;
        let control = if eps_c > 0.0 && self.rng.gen::<f64>() < eps_c {
            self.rng.gen_range(0..self.n_actions)
        } else {
            argmax(&self.qc.q_online(&x)?)
        };
        let k_index = if eps_m > 0.0 && self.rng.gen::<f64>() < eps_m {
            self.rng.gen_range(0..self.max_repeat)
        } else {
            let xm = self.measure_input(&x, control);
            argmax(&self.qm.q_online(&xm)?)
        };
        Ok(SkipDecision { control, repeat: k_index + 1 })
    }

    pub fn act_greedy(&mut self, packet: &ObservationPacket) -> Result<SkipDecision> {
        self.act_with(packet, 0.0, 0.0)
    }

    /// Double-DQN regression targets `(Y_c, Y_m)` for stored experiences.
    pub fn targets(&mut self, batch: &[Experience]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut yc = Vec::with_capacity(batch.len());
        let mut ym = Vec::with_capacity(batch.len());
        for e in batch {
            if e.terminal {
                yc.push(e.reward);
                ym.push(e.reward);
                continue;
            }
            let discount = self.gamma.powi(e.discount_exponent as i32);
            let next_control = argmax(&self.qc.q_online(&e.next_obs)?);
            yc.push(e.reward + discount * self.qc.q_target(&e.next_obs)?[next_control]);
            let xm = self.measure_input(&e.next_obs, next_control);
            let next_k = argmax(&self.qm.q_online(&xm)?);
            ym.push(e.reward + discount * self.qm.q_target(&xm)?[next_k]);
        }
        Ok((yc, ym))
    }

    /// Converts a wrapper transition into a stored experience.
    pub fn experience(&self, t: &CostedTransition) -> Result<Experience> {
        Ok(Experience {
            obs: self.features(&t.obs)?,
            control: t.control,
            secondary: t.a_m_or_k - 1,
            reward: t.reward,
            next_obs: self.features(&t.next_obs)?,
            terminal: t.terminal,
            truncated: t.truncated,
            discount_exponent: t.base_steps as u32,
        })
    }

    pub fn remember(&mut self, e: Experience) {
        self.replay.push_max(e);
    }

    /// One prioritized minibatch update of both networks.
    pub fn train_step(&mut self) -> Result<Option<(f64, f64)>> {
        let batch_size = self.cfg.schedule.batch_size;
        if self.replay.len() < batch_size {
            return Ok(None);
        }
        let beta = self.cfg.beta(self.decisions);
        let batch = self.replay.sample(batch_size, beta, &mut self.rng)?;
        let (yc, ym) = self.targets(&batch.items)?;
        let xc: Vec<Vec<f64>> = batch.items.iter().map(|e| e.obs.clone()).collect();
        let ac: Vec<usize> = batch.items.iter().map(|e| e.control).collect();
        let xm: Vec<Vec<f64>> = batch.items.iter().map(|e| self.measure_input(&e.obs, e.control)).collect();
        let am: Vec<usize> = batch.items.iter().map(|e| e.secondary).collect();
        let (loss_c, err_c) = self.qc.fit(&xc, &ac, &yc, &batch.weights)?;
        let (loss_m, err_m) = self.qm.fit(&xm, &am, &ym, &batch.weights)?;
        let td: Vec<f64> = match self.cfg.priority {
            super::PrioritySource::Control => err_c,
            super::PrioritySource::Max => err_c.iter().zip(&err_m).map(|(a, b)| a.abs().max(b.abs())).collect(),
        };
        self.replay.update_priorities(&batch.indices, &td)?;
        self.updates += 1;
        self.last_loss = Some((loss_c, loss_m));
        Ok(self.last_loss)
    }

    fn epsilons(&self) -> (f64, f64) {
        let s = &self.cfg.schedule;
        (s.eps_control.value(self.decisions), s.eps_measure.value(self.decisions))
    }
}

impl Agent for DmsoaAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::Dmsoa
    }

    fn begin_episode(&mut self, env: &BoxedAcNomdp) -> Result<()> {
        env.observation().map(|_| ())
    }

    fn decide(&mut self, env: &mut BoxedAcNomdp, learn: bool) -> Result<CostedTransition> {
        let packet = env.observation()?.clone();
        let decision = if learn {
            let (eps_c, eps_m) = self.epsilons();
            self.act_with(&packet, eps_c, eps_m)?
        } else {
            self.act_greedy(&packet)?
        };
        let t = env.dmsoa_schedule(decision)?;
        if learn {
            let e = self.experience(&t)?;
            self.remember(e);
            self.decisions += 1;
            let s = self.cfg.schedule;
            if self.decisions > s.warmup_decisions && self.decisions % s.train_every == 0 {
                self.train_step()?;
            }
            if self.decisions % self.cfg.tau == 0 {
                self.qc.sync_target()?;
                self.qm.sync_target()?;
            }
        }
        Ok(t)
    }

    fn decisions_made(&self) -> u64 {
        self.decisions
    }

    fn snapshot(&self) -> AgentSnapshot {
        AgentSnapshot {
            kind: AgentKind::Dmsoa,
            env_name: self.env_name.clone(),
            obs_dim: self.obs_dim,
            n_actions: self.n_actions,
            max_repeat: self.max_repeat,
            memory_window: 1,
            gamma: self.gamma,
            encoding: self.cfg.encoding,
            input_scale: self.cfg.input_scale.clone(),
            nets: vec![self.qc.online().clone(), self.qm.online().clone()],
        }
    }
}
