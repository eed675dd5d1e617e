use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::qnet::{argmax, QNetwork, QNetworkOptions};
use super::{Agent, AgentConfig, AgentKind, AgentSnapshot, BoxedAcNomdp};
use crate::acnomdp::{ActionTuple, CostedTransition};
use crate::replay::{Experience, NStepAccumulator, PrioritizedReplay};
use crate::{Error, Result};

/// One network over `(control, measure?)` tuples, fed the memory window
/// plus the freshness flag.
#[derive(Debug, Clone)]
pub struct OsmboaAgent {
    cfg: AgentConfig,
    env_name: String,
    obs_dim: usize,
    n_actions: usize,
    memory_window: usize,
    max_repeat: usize,
    gamma: f64,
    q: QNetwork,
    replay: PrioritizedReplay<Experience>,
    nstep: NStepAccumulator,
    rng: ChaCha8Rng,
    decisions: u64,
    updates: u64,
    last_loss: Option<f64>,
}

impl OsmboaAgent {
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
        let q = QNetwork::new(env.augmented_dim(), 2 * d.n_actions, &opts, &mut rng)?;
        Ok(Self {
            cfg: cfg.clone(),
            env_name: env.env().name(),
            obs_dim: d.obs_dim,
            n_actions: d.n_actions,
            memory_window: w.memory_window,
            max_repeat: w.max_repeat,
            gamma: w.reward.gamma,
            q,
            replay: PrioritizedReplay::new(cfg.replay),
            nstep: NStepAccumulator::new(cfg.n_step, w.reward.gamma),
            rng,
            decisions: 0,
            updates: 0,
            last_loss: None,
        })
    }

    pub(crate) fn from_snapshot(s: &AgentSnapshot, cfg: &AgentConfig) -> Result<Self> {
        let [q] = s.nets.as_slice() else {
            return Err(Error::Checkpoint(format!("osmboa expects 1 network, found {}", s.nets.len())));
        };
        Ok(Self {
            cfg: AgentConfig { input_scale: s.input_scale.clone(), ..cfg.clone() },
            env_name: s.env_name.clone(),
            obs_dim: s.obs_dim,
            n_actions: s.n_actions,
            memory_window: s.memory_window,
            max_repeat: s.max_repeat,
            gamma: s.gamma,
            q: QNetwork::from_online(q.clone(), cfg.optimizer, cfg.lr, cfg.loss, cfg.grad_clip),
            replay: PrioritizedReplay::new(cfg.replay),
            nstep: NStepAccumulator::new(cfg.n_step, s.gamma),
            rng: ChaCha8Rng::seed_from_u64(0),
            decisions: 0,
            updates: 0,
            last_loss: None,
        })
    }

    pub fn net(&self) -> &QNetwork {
        &self.q
    }

    pub fn net_mut(&mut self) -> &mut QNetwork {
        &mut self.q
    }

    pub fn replay(&self) -> &PrioritizedReplay<Experience> {
        &self.replay
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.last_loss
    }

    /// Scales each memory block; the trailing freshness flag is left as is.
    pub fn features(&self, augmented: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(augmented.len());
        let (states, flag) = augmented.split_at(augmented.len() - 1);
        for block in states.chunks(self.obs_dim.max(1)) {
            self.cfg.scale_into(block, &mut x);
        }
        x.extend_from_slice(flag);
        x
    }

    /// Greedy tuple, then each component is independently replaced by a
    /// uniform draw with its own probability.
    pub fn act_with(&mut self, x: &[f64], eps_c: f64, eps_m: f64) -> Result<ActionTuple> {
        let mut tuple = ActionTuple::from_index(argmax(&self.q.q_online(x)?));
        if eps_c > 0.0 && self.rng.gen::<f64>() < eps_c {
            tuple.control = self.rng.gen_range(0..self.n_actions);
        }
        if eps_m > 0.0 && self.rng.gen::<f64>() < eps_m {
            tuple.measure = self.rng.gen_bool(0.5);
        }
        Ok(tuple)
    }

    pub fn act_greedy(&mut self, x: &[f64]) -> Result<ActionTuple> {
        self.act_with(x, 0.0, 0.0)
    }

    /// Double-DQN targets for stored (possibly multi-step) experiences.
    pub fn targets(&mut self, batch: &[Experience]) -> Result<Vec<f64>> {
        let mut y = Vec::with_capacity(batch.len());
        for e in batch {
            if e.terminal {
                y.push(e.reward);
                continue;
            }
            let discount = self.gamma.powi(e.discount_exponent as i32);
            let best = argmax(&self.q.q_online(&e.next_obs)?);
            y.push(e.reward + discount * self.q.q_target(&e.next_obs)?[best]);
        }
        Ok(y)
    }

    pub fn train_step(&mut self) -> Result<Option<f64>> {
        let batch_size = self.cfg.schedule.batch_size;
        if self.replay.len() < batch_size {
            return Ok(None);
        }
        let beta = self.cfg.beta(self.decisions);
        let batch = self.replay.sample(batch_size, beta, &mut self.rng)?;
        let y = self.targets(&batch.items)?;
        let x: Vec<Vec<f64>> = batch.items.iter().map(|e| e.obs.clone()).collect();
        let a: Vec<usize> = batch
            .items
            .iter()
            .map(|e| ActionTuple { control: e.control, measure: e.secondary == 1 }.index())
            .collect();
        let (loss, err) = self.q.fit(&x, &a, &y, &batch.weights)?;
        self.replay.update_priorities(&batch.indices, &err)?;
        self.updates += 1;
        self.last_loss = Some(loss);
        Ok(self.last_loss)
    }
}

impl Agent for OsmboaAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::Osmboa
    }

    fn begin_episode(&mut self, env: &BoxedAcNomdp) -> Result<()> {
        self.nstep.clear();
        env.observation().map(|_| ())
    }

    fn decide(&mut self, env: &mut BoxedAcNomdp, learn: bool) -> Result<CostedTransition> {
        let x = self.features(&env.osmboa_observe()?);
        let tuple = if learn {
            let s = &self.cfg.schedule;
            let (eps_c, eps_m) = (s.eps_control.value(self.decisions), s.eps_measure.value(self.decisions));
            self.act_with(&x, eps_c, eps_m)?
        } else {
            self.act_greedy(&x)?
        };
        let t = env.osmboa_step(tuple)?;
        if learn {
            let next = self.features(&env.osmboa_observe()?);
            let e = Experience {
                obs: x,
                control: tuple.control,
                secondary: usize::from(tuple.measure),
                reward: t.reward,
                next_obs: next,
                terminal: t.terminal,
                truncated: t.truncated,
                discount_exponent: 1,
            };
            for ready in self.nstep.push(e) {
                self.replay.push_max(ready);
            }
            self.decisions += 1;
            let s = self.cfg.schedule;
            if self.decisions > s.warmup_decisions && self.decisions % s.train_every == 0 {
                self.train_step()?;
            }
            if self.decisions % self.cfg.tau == 0 {
                self.q.sync_target()?;
            }
        }
        Ok(t)
    }

    fn decisions_made(&self) -> u64 {
        self.decisions
    }

    fn snapshot(&self) -> AgentSnapshot {
        AgentSnapshot {
            kind: AgentKind::Osmboa,
            env_name: self.env_name.clone(),
            obs_dim: self.obs_dim,
            n_actions: self.n_actions,
            max_repeat: self.max_repeat,
            memory_window: self.memory_window,
            gamma: self.gamma,
            encoding: self.cfg.encoding,
            input_scale: self.cfg.input_scale.clone(),
            nets: vec![self.q.online().clone()],
        }
    }
}
