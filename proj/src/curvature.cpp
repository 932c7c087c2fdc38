#include "finsler/curvature.hpp"

namespace finsler {

namespace {

/// out[new index] = T[old index], new position a takes old position perm[a].
JetTensor permute(const JetTensor& T, const std::vector<int>& perm) {
  std::string var(T.rank(), 'l');
  for (int a = 0; a < T.rank(); ++a) var[a] = T.variance()[perm[a]];
  JetTensor out(T.dim(), var, T[0].config());
  std::vector<int> old(T.rank());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto idx = out.unflat(k);
    for (int a = 0; a < T.rank(); ++a) old[perm[a]] = idx[a];
    out[k] = T[T.flat(old)];
  }
  return out;
}

Jet zero(const SprayJets& S, int order) { return Jet(JetConfig{2 * S.n, std::max(order, 0)}); }

}  // namespace

JetTensor riemann_jets(const SprayJets& S) {
  const int n = S.n;
  if (S.Gamma.empty() || S.Gamma[0].order() < 0) throw OrderError("Riemann curvature", 2, 0);
  JetTensor R(n, "ul", S.Gamma[0].config());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      Jet v = S.G[i].derivative(S.xvar(k)) * 2.0;
      for (int m = 0; m < n; ++m) {
        v -= S.Nij(i, k).derivative(S.xvar(m)) * S.y[m];
        v += S.G[m] * S.Gam(i, m, k) * 2.0;
        v -= S.Nij(i, m) * S.Nij(m, k);
      }
      R.at({i, k}) = v;
    }
  }
  return R;
}

JetTensor ricci_jets(const JetTensor& R) {
  const int n = R.dim();
  Jet s = R.at({0, 0});
  for (int m = 1; m < n; ++m) s += R.at({m, m});
  return scalar_tensor(s, n);
}

JetTensor antisym_vertical(const JetTensor& X, const SprayJets& S) {
  const int n = S.n;
  const JetTensor dX = vertical_derivative(X, S);  // [i][k][l]
  JetTensor out(n, "ull", dX[0].config());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) out.at({i, k, l}) = (dX.at({i, k, l}) - dX.at({i, l, k})) * (1.0 / 3.0);
    }
  }
  return out;
}

JetTensor berwald_jets(const SprayJets& S) {
  const int n = S.n;
  if (S.Gamma.empty() || S.Gamma[0].order() < 1) throw OrderError("Berwald curvature", 3, S.G[0].order());
  JetTensor B(n, "lull", S.Gamma[0].derivative(0).config());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          B.at({j, i, k, l}) = S.Gam(i, j, k).derivative(S.yvar(l));
        }
      }
    }
  }
  return B;
}

JetTensor mean_berwald_jets(const JetTensor& B) {
  const int n = B.dim();
  JetTensor E(n, "ll", B[0].config());
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      Jet s = B.at({j, 0, k, 0});
      for (int m = 1; m < n; ++m) s += B.at({j, m, k, m});
      E.at({j, k}) = s * 0.5;
    }
  }
  return E;
}

JetTensor douglas_jets(const SprayJets& S, const JetTensor& B) {
  const int n = S.n;
  Jet trace = S.Nij(0, 0);
  for (int m = 1; m < n; ++m) trace += S.Nij(m, m);
  if (trace.order() < 3) throw OrderError("Douglas curvature", 4, S.G[0].order());
  JetTensor D(n, "lull", JetConfig{2 * n, trace.order() - 3});
  const double c = 1.0 / (n + 1);
  for (int i = 0; i < n; ++i) {
    const Jet phi = trace * S.y[i];
    for (int j = 0; j < n; ++j) {
      const Jet pj = phi.derivative(S.yvar(j));
      for (int k = 0; k < n; ++k) {
        const Jet pjk = pj.derivative(S.yvar(k));
        for (int l = 0; l < n; ++l) {
          D.at({j, i, k, l}) = B.at({j, i, k, l}) - pjk.derivative(S.yvar(l)) * c;
        }
      }
    }
  }
  return D;
}

JetTensor douglas_from_mean(const SprayJets& S, const JetTensor& B, const JetTensor& E) {
  const int n = S.n;
  const JetTensor dE = vertical_derivative(E, S);  // [j][k][l]
  JetTensor D(n, "lull", dE[0].config());
  const double c = 2.0 / (n + 1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          Jet v = dE.at({j, k, l}) * S.y[i];
          if (i == l) v += E.at({j, k});
          if (i == k) v += E.at({j, l});
          if (i == j) v += E.at({k, l});
          D.at({j, i, k, l}) = B.at({j, i, k, l}) - v * c;
        }
      }
    }
  }
  return D;
}

JetTensor weyl_jets(const SprayJets& S, const JetTensor& R, const JetTensor& Ric) {
  const int n = S.n;
  if (n < 2) throw InputError("Weyl curvature needs n >= 2");
  const double cr = 1.0 / (n - 1);
  JetTensor A = R;
  for (int i = 0; i < n; ++i) A.at({i, i}) -= Ric[0] * cr;
  if (A.order() < 1) throw OrderError("Weyl curvature", 3, S.G[0].order());
  JetTensor W(n, "ul", JetConfig{2 * n, A.order() - 1});
  std::vector<Jet> trace;
  for (int k = 0; k < n; ++k) {
    Jet t = A.at({0, k}).derivative(S.yvar(0));
    for (int m = 1; m < n; ++m) t += A.at({m, k}).derivative(S.yvar(m));
    trace.push_back(t);
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) W.at({i, k}) = A.at({i, k}) - trace[k] * S.y[i] * (1.0 / (n + 1));
  }
  return W;
}

// ---------------------------------------------------------------------------

CurvatureBundle::CurvatureBundle(const Spray& spray, const EvalPoint& p, int f2_order)
    : S_(spray_jets(spray, p, f2_order - 2)), g_order_(f2_order - 2) {}

void CurvatureBundle::need(Quantity q, const char* what) const {
  const int req = required_f2_order(q);
  if (g_order_ + 2 < req) throw OrderError(what, req, g_order_ + 2);
}

#define CACHED(key) \
  if (auto it = cache_.find(key); it != cache_.end() && it->second.size() != 0) return it->second; \
  auto& slot = cache_[key];

const JetTensor& CurvatureBundle::G() {
  CACHED("G");
  slot = JetTensor(S_.n, "u", S_.G[0].config());
  for (int i = 0; i < S_.n; ++i) slot[i] = S_.G[i];
  return slot;
}

const JetTensor& CurvatureBundle::R() {
  need(Quantity::riemann, "Riemann curvature");
  CACHED("R");
  slot = riemann_jets(S_);
  return slot;
}

const JetTensor& CurvatureBundle::Ric() {
  CACHED("Ric");
  slot = ricci_jets(R());
  return slot;
}

const JetTensor& CurvatureBundle::R_kl() {
  need(Quantity::riemann_kl, "R^i_kl");
  CACHED("R_kl");
  slot = antisym_vertical(R(), S_);
  return slot;
}

const JetTensor& CurvatureBundle::R_jkl() {
  need(Quantity::riemann_jkl, "R_j^i_kl");
  CACHED("R_jkl");
  // R_j^i_kl = R^i_kl.j
  slot = permute(vertical_derivative(R_kl(), S_), {3, 0, 1, 2});
  return slot;
}

const JetTensor& CurvatureBundle::B() {
  need(Quantity::berwald, "Berwald curvature");
  CACHED("B");
  slot = berwald_jets(S_);
  return slot;
}

const JetTensor& CurvatureBundle::E() {
  need(Quantity::mean_berwald, "mean Berwald curvature");
  CACHED("E");
  slot = mean_berwald_jets(B());
  return slot;
}

const JetTensor& CurvatureBundle::H() {
  need(Quantity::h_curvature, "H-curvature");
  CACHED("H");
  slot = horizontal_derivative_0(E(), S_);
  return slot;
}

const JetTensor& CurvatureBundle::D() {
  need(Quantity::douglas, "Douglas curvature");
  CACHED("D");
  slot = douglas_jets(S_, B());
  return slot;
}

const JetTensor& CurvatureBundle::D_from_E() {
  need(Quantity::douglas, "Douglas curvature");
  CACHED("D2");
  slot = douglas_from_mean(S_, B(), E());
  return slot;
}

const JetTensor& CurvatureBundle::D_m() {
  need(Quantity::dtilde, "D_|m");
  CACHED("D_m");
  slot = horizontal_derivative(D(), S_);
  return slot;
}

const JetTensor& CurvatureBundle::Dtilde() {
  need(Quantity::dtilde, "Dtilde");
  CACHED("Dtilde");
  slot = contract_y(D_m(), S_);
  return slot;
}

const JetTensor& CurvatureBundle::Dtilde_m() {
  need(Quantity::dtilde_0, "Dtilde_|m");
  CACHED("Dtilde_m");
  slot = horizontal_derivative(Dtilde(), S_);
  return slot;
}

const JetTensor& CurvatureBundle::Dtilde_0() {
  need(Quantity::dtilde_0, "Dtilde_|0");
  CACHED("Dtilde_0");
  slot = contract_y(Dtilde_m(), S_);
  return slot;
}

const JetTensor& CurvatureBundle::stretch_douglas() {
  need(Quantity::stretch_douglas, "stretch Douglas curvature");
  CACHED("StretchD");
  const JetTensor& Dm = Dtilde_m();
  slot = JetTensor(S_.n, "lulll", Dm[0].config());
  const int n = S_.n;
  for (std::size_t k = 0; k < slot.size(); ++k) {
    auto idx = slot.unflat(k);  // j i k l m
    auto sw = idx;
    std::swap(sw[3], sw[4]);
    slot[k] = (Dm[k] - Dm[Dm.flat(sw)]) * 2.0;
  }
  (void)n;
  return slot;
}

const JetTensor& CurvatureBundle::W() {
  need(Quantity::weyl, "Weyl curvature");
  CACHED("W");
  slot = weyl_jets(S_, R(), Ric());
  return slot;
}

const JetTensor& CurvatureBundle::W_jkl() {
  need(Quantity::weakly_weyl, "weakly-Weyl curvature");
  CACHED("W_jkl");
  // (1/3)(W^i_k.l - W^i_l.k).j, stored [j][i][k][l]
  slot = permute(vertical_derivative(antisym_vertical(W(), S_), S_), {3, 0, 1, 2});
  return slot;
}

const JetTensor& CurvatureBundle::Wtilde() {
  need(Quantity::wtilde, "Wtilde");
  CACHED("Wtilde");
  const JetTensor dW = vertical_derivative(W_jkl(), S_);  // [j][i][m][l][k]
  const int n = S_.n;
  slot = JetTensor(n, "lull", dW[0].config());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          Jet s = zero(S_, dW.order());
          for (int m = 0; m < n; ++m) s += dW.at({j, i, m, l, k}) * S_.y[m];
          slot.at({j, i, k, l}) = s;
        }
      }
    }
  }
  return slot;
}

const JetTensor& CurvatureBundle::Wtilde_0() {
  need(Quantity::wtilde_0, "Wtilde_|0");
  CACHED("Wtilde_0");
  slot = horizontal_derivative_0(Wtilde(), S_);
  return slot;
}

const JetTensor& CurvatureBundle::theta(ThetaReading reading) {
  need(Quantity::theta, "theta");
  const std::string key = reading == ThetaReading::ricci ? "theta" : "theta_n1";
  CACHED(key);
  const int n = S_.n;
  const double c = reading == ThetaReading::ricci ? 1.0 : 1.0 / (n - 1);
  const JetTensor Eh = horizontal_derivative(E(), S_);  // [j][k][l]
  const JetTensor dR = vertical_derivative(R(), S_);    // [s][l][t]
  const JetTensor& ric = Ric();
  JetTensor V(n, "l", dR[0].config());
  for (int l = 0; l < n; ++l) {
    Jet v = ric[0].derivative(S_.yvar(l)) * (-(n + 2) * c);
    for (int s = 0; s < n; ++s) v += dR.at({s, l, s});
    V[l] = v;
  }
  const JetTensor Vjk = vertical_derivative(vertical_derivative(V, S_), S_);  // [l][j][k]
  slot = JetTensor(n, "lll", Vjk[0].config());
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        slot.at({j, k, l}) = Eh.at({j, k, l}) * 2.0 - Vjk.at({l, j, k}) * (1.0 / 3.0);
      }
    }
  }
  return slot;
}

#undef CACHED

const std::vector<std::string>& CurvatureBundle::tensor_names() {
  static const std::vector<std::string> names{
      "G", "N", "Gamma", "R", "Ric", "R_kl", "R_jkl", "B", "E", "H", "D", "D2", "Dtilde", "Dtilde_0",
      "StretchD", "W", "W_jkl", "Wtilde", "Wtilde_0", "theta"};
  return names;
}

TensorSample CurvatureBundle::sample(const std::string& name) {
  const EvalPoint& p = S_.p;
  if (name == "G") return G().sample(name, p);
  if (name == "N" || name == "Gamma") {
    const auto& src = name == "N" ? S_.N : S_.Gamma;
    if (src.empty()) throw OrderError(name, name == "N" ? 3 : 4, g_order_ + 2);
    TensorSample t;
    t.label = name;
    t.dim = S_.n;
    t.variance = name == "N" ? "ul" : "ull";
    t.at = p;
    for (const auto& j : src) t.values.push_back(j.value());
    return t;
  }
  if (name == "R") return R().sample(name, p);
  if (name == "Ric") return Ric().sample(name, p);
  if (name == "R_kl") return R_kl().sample(name, p);
  if (name == "R_jkl") return R_jkl().sample(name, p);
  if (name == "B") return B().sample(name, p);
  if (name == "E") return E().sample(name, p);
  if (name == "H") return H().sample(name, p);
  if (name == "D") return D().sample(name, p);
  if (name == "D2") return D_from_E().sample(name, p);
  if (name == "Dtilde") return Dtilde().sample(name, p);
  if (name == "Dtilde_0") return Dtilde_0().sample(name, p);
  if (name == "StretchD") return stretch_douglas().sample(name, p);
  if (name == "W") return W().sample(name, p);
  if (name == "W_jkl") return W_jkl().sample(name, p);
  if (name == "Wtilde") return Wtilde().sample(name, p);
  if (name == "Wtilde_0") return Wtilde_0().sample(name, p);
  if (name == "theta") return theta().sample(name, p);
  throw InputError("unknown tensor '" + name + "'");
}

}  // namespace finsler
