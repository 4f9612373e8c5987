use crate::distributions::ModelSpec;
use crate::rng::Stream;

/// Recorded randomness around time 0: backward arrivals `−1, −2, …` and
/// forward arrivals `0, 1, …`. Entries are append-only.
#[derive(Debug, Clone)]
pub struct Scenario {
    t: Vec<f64>,
    s: Vec<f64>,
    u: Vec<usize>,
    /// `times[j]` is the epoch of arrival `−j` (`times[0] = 0`).
    times: Vec<f64>,
    ft: Vec<f64>,
    fs: Vec<f64>,
    fu: Vec<usize>,
    model: ModelSpec,
    forward: Stream,
}

impl Scenario {
    pub fn new(model: &ModelSpec, forward: Stream) -> Self {
        Self {
            t: Vec::new(),
            s: Vec::new(),
            u: Vec::new(),
            times: vec![0.0],
            ft: Vec::new(),
            fs: Vec::new(),
            fu: Vec::new(),
            model: model.clone(),
            forward,
        }
    }

    pub fn servers(&self) -> usize {
        self.model.servers
    }

    /// Number of recorded backward arrivals.
    pub fn depth(&self) -> usize {
        self.t.len()
    }

    pub fn push_backward(&mut self, t: f64, s: f64, u: usize) {
        debug_assert!(t >= 0.0 && s >= 0.0 && u < self.model.servers);
        self.t.push(t);
        self.s.push(s);
        self.u.push(u);
        let last = *self.times.last().unwrap();
        self.times.push(last - t);
    }

    /// Interarrival time following arrival `−j` (1-based).
    pub fn t(&self, j: usize) -> f64 {
        self.t[j - 1]
    }

    /// Service requirement brought by arrival `−j`.
    pub fn s(&self, j: usize) -> f64 {
        self.s[j - 1]
    }

    /// Node of arrival `−j` (0-based).
    pub fn u(&self, j: usize) -> usize {
        self.u[j - 1]
    }

    /// Epoch of arrival `−j`; `0` for `j = 0`.
    pub fn time(&self, j: usize) -> f64 {
        self.times[j]
    }

    /// Number of forward arrivals drawn so far.
    pub fn forward_len(&self) -> usize {
        self.ft.len()
    }

    /// Forward arrival `k` as `(T_k, S_k, U_k)`, drawing fresh values when needed.
    pub fn forward(&mut self, k: usize) -> (f64, f64, usize) {
        while self.ft.len() <= k {
            let t = self.model.arrival.sample(&mut self.forward);
            let s = self.model.service.sample(&mut self.forward);
            let u = self.forward.index(self.model.servers);
            self.ft.push(t);
            self.fs.push(s);
            self.fu.push(u);
        }
        (self.ft[k], self.fs[k], self.fu[k])
    }

    pub fn backward_t(&self) -> &[f64] {
        &self.t
    }

    pub fn backward_s(&self) -> &[f64] {
        &self.s
    }

    pub fn backward_u(&self) -> &[usize] {
        &self.u
    }
}
