#include "loopbound/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loopbound/errors.hpp"

namespace loopbound {

TorusLattice::TorusLattice(int d, int L) : d_(d), L_(L), volume_(1), stride_(d) {
  if (d < 1) throw PreconditionError("lattice dimension must be positive");
  if (L < 3) throw PreconditionError("side length must be at least 3 (L = 2 would create double edges)");
  for (int j = 0; j < d; ++j) {
    stride_[j] = volume_;
    volume_ *= static_cast<std::size_t>(L);
  }
}

std::size_t TorusLattice::shift(std::size_t v, int axis, int step) const {
  const auto s = stride_[axis];
  const auto coord = static_cast<int>((v / s) % static_cast<std::size_t>(L_));
  const int moved = ((coord + step) % L_ + L_) % L_;
  return v + (static_cast<std::size_t>(moved) - static_cast<std::size_t>(coord)) * s;
}

void TorusLattice::incident_edges(std::size_t v, std::vector<std::size_t>& out) const {
  out.clear();
  for (int j = 0; j < d_; ++j) {
    out.push_back(v * d_ + j);
    out.push_back(shift(v, j, -1) * d_ + j);
  }
}

std::vector<int> TorusLattice::coordinates(std::size_t v) const {
  std::vector<int> c(d_);
  for (int j = 0; j < d_; ++j) c[j] = static_cast<int>((v / stride_[j]) % static_cast<std::size_t>(L_));
  return c;
}

std::size_t TorusLattice::vertex(std::span<const int> coords) const {
  std::size_t v = 0;
  for (int j = 0; j < d_; ++j) v += static_cast<std::size_t>(((coords[j] % L_) + L_) % L_) * stride_[j];
  return v;
}

std::size_t TorusLattice::translate(std::size_t v, std::size_t w) const {
  std::size_t out = 0;
  for (int j = 0; j < d_; ++j) {
    const auto a = (v / stride_[j]) % static_cast<std::size_t>(L_);
    const auto b = (w / stride_[j]) % static_cast<std::size_t>(L_);
    out += ((a + b) % static_cast<std::size_t>(L_)) * stride_[j];
  }
  return out;
}

LinkConfiguration::LinkConfiguration(const TorusLattice& lattice, double beta)
    : lattice_(lattice), beta_(beta), per_edge_(lattice.edge_count()) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw PreconditionError("beta must be finite and positive");
}

namespace {

auto time_less = [](const LinkConfiguration::Entry& e, double t) { return e.time < t; };

}  // namespace

bool LinkConfiguration::vertex_has_time(std::size_t v, double time) const {
  std::vector<std::size_t> edges;
  lattice_.incident_edges(v, edges);
  for (auto e : edges) {
    if (contains(e, time)) return true;
  }
  return false;
}

bool LinkConfiguration::contains(std::size_t edge, double time) const {
  const auto& list = per_edge_[edge];
  const auto it = std::lower_bound(list.begin(), list.end(), time, time_less);
  return it != list.end() && it->time == time;
}

bool LinkConfiguration::insert(const Link& link) {
  if (link.edge >= per_edge_.size()) throw PreconditionError("edge index out of range");
  if (!(link.time >= 0.0 && link.time < beta_)) throw PreconditionError("link time outside [0, beta)");
  if (vertex_has_time(lattice_.edge_tail(link.edge), link.time) ||
      vertex_has_time(lattice_.edge_head(link.edge), link.time)) {
    return false;
  }
  auto& list = per_edge_[link.edge];
  const auto it = std::lower_bound(list.begin(), list.end(), link.time, time_less);
  list.insert(it, Entry{link.time, link.kind, links_.size()});
  links_.push_back(link);
  return true;
}

Link LinkConfiguration::remove_at(std::size_t slot) {
  if (slot >= links_.size()) throw PreconditionError("link slot out of range");
  const Link removed = links_[slot];
  auto& list = per_edge_[removed.edge];
  list.erase(std::lower_bound(list.begin(), list.end(), removed.time, time_less));
  const std::size_t last = links_.size() - 1;
  if (slot != last) {
    const Link& moved = links_[last];
    auto& moved_list = per_edge_[moved.edge];
    std::lower_bound(moved_list.begin(), moved_list.end(), moved.time, time_less)->slot = slot;
    links_[slot] = moved;
  }
  links_.pop_back();
  return removed;
}

bool LinkConfiguration::erase(std::size_t edge, double time) {
  if (edge >= per_edge_.size()) return false;
  const auto& list = per_edge_[edge];
  const auto it = std::lower_bound(list.begin(), list.end(), time, time_less);
  if (it == list.end() || it->time != time) return false;
  remove_at(it->slot);
  return true;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

// Legs of link s: 4s + {0: tail below, 1: tail above, 2: head below, 3: head above}.
std::size_t leg(std::size_t slot, bool head_side, bool above) {
  return 4 * slot + (head_side ? 2 : 0) + (above ? 1 : 0);
}

}  // namespace

LoopDecomposition trace_loops(const LinkConfiguration& config) {
  const auto& lattice = config.lattice();
  const auto& links = config.links();
  const std::size_t n_vertices = lattice.vertex_count();
  DisjointSets sets(4 * links.size());
  for (std::size_t s = 0; s < links.size(); ++s) {
    if (links[s].kind == LinkKind::Cross) {
      sets.unite(leg(s, false, false), leg(s, true, true));
      sets.unite(leg(s, false, true), leg(s, true, false));
    } else {
      sets.unite(leg(s, false, false), leg(s, true, false));
      sets.unite(leg(s, false, true), leg(s, true, true));
    }
  }
  struct Event {
    double time;
    std::size_t slot;
    bool head_side;
  };
  std::vector<std::vector<Event>> events(n_vertices);
  for (std::size_t s = 0; s < links.size(); ++s) {
    events[lattice.edge_tail(links[s].edge)].push_back({links[s].time, s, false});
    events[lattice.edge_head(links[s].edge)].push_back({links[s].time, s, true});
  }
  for (auto& list : events) {
    std::sort(list.begin(), list.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Event& from = list[i];
      const Event& to = list[(i + 1) % list.size()];
      sets.unite(leg(from.slot, from.head_side, true), leg(to.slot, to.head_side, false));
    }
  }

  LoopDecomposition out;
  std::vector<std::size_t> label(4 * links.size(), SIZE_MAX);
  std::size_t next_id = 0;
  auto id_of = [&](std::size_t l) {
    const auto root = sets.find(l);
    if (label[root] == SIZE_MAX) label[root] = next_id++;
    return label[root];
  };
  out.event_times_.resize(n_vertices);
  out.segment_loop_.resize(n_vertices);
  out.lone_loop_.assign(n_vertices, SIZE_MAX);
  for (std::size_t v = 0; v < n_vertices; ++v) {
    const auto& list = events[v];
    if (list.empty()) {
      out.lone_loop_[v] = next_id++;
      continue;
    }
    for (const Event& e : list) {
      out.event_times_[v].push_back(e.time);
      out.segment_loop_[v].push_back(id_of(leg(e.slot, e.head_side, false)));
    }
  }
  out.loop_count_ = next_id;
  return out;
}

std::size_t LoopDecomposition::loop_of(std::size_t v, double t) const {
  if (lone_loop_[v] != SIZE_MAX) return lone_loop_[v];
  const auto& times = event_times_[v];
  auto i = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
  if (i == times.size()) i = 0;
  return segment_loop_[v][i];
}

std::vector<std::size_t> LoopDecomposition::loops_at_zero() const {
  std::vector<std::size_t> out(lone_loop_.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = loop_of(v, 0.0);
  return out;
}

namespace {

struct NextEvent {
  std::size_t edge;
  double time;
  LinkKind kind;
  double gap;
};

// First link event met at v when moving from time t in direction `up`,
// skipping the excluded link. Gaps are in (0, β].
std::optional<NextEvent> next_event(const LinkConfiguration& config, std::size_t v, double t, bool up,
                                    const std::optional<std::pair<std::size_t, double>>& excluded,
                                    std::vector<std::size_t>& scratch) {
  const double beta = config.beta();
  config.lattice().incident_edges(v, scratch);
  std::optional<NextEvent> best;
  for (auto e : scratch) {
    const auto& list = config.edge_links(e);
    const std::size_t n = list.size();
    if (n == 0) continue;
    auto skip = [&](std::size_t i) { return excluded && excluded->first == e && excluded->second == list[i].time; };
    const auto upper = static_cast<std::size_t>(
        std::upper_bound(list.begin(), list.end(), t,
                         [](double value, const LinkConfiguration::Entry& x) { return value < x.time; }) -
        list.begin());
    const auto lower = static_cast<std::size_t>(std::lower_bound(list.begin(), list.end(), t, time_less) - list.begin());
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t i = up ? (upper + step) % n : (lower + n - 1 - step) % n;
      if (skip(i)) continue;
      double gap = up ? list[i].time - t : t - list[i].time;
      if (gap <= 0.0) gap += beta;
      if (!best || gap < best->gap) best = NextEvent{e, list[i].time, list[i].kind, gap};
      break;
    }
  }
  return best;
}

// Whether time tau lies strictly inside the open traversal from t0 over
// length gap in the given direction, on the circle of length β.
bool passes(double t0, double gap, bool up, double tau, double beta) {
  double offset = up ? tau - t0 : t0 - tau;
  offset = std::fmod(offset, beta);
  if (offset < 0.0) offset += beta;
  return offset > 0.0 && offset < gap;
}

}  // namespace

int delta_loops_on_insert(const LinkConfiguration& config, const Link& link,
                          std::optional<std::pair<std::size_t, double>> excluded) {
  const auto& lattice = config.lattice();
  const std::size_t x = lattice.edge_tail(link.edge);
  const std::size_t y = lattice.edge_head(link.edge);
  const double tau = link.time;
  const double beta = config.beta();
  std::vector<std::size_t> scratch;
  std::size_t v = x;
  double t = tau;
  bool up = true;
  const std::size_t limit = 4 * config.link_count() + 8;
  for (std::size_t iter = 0; iter <= limit; ++iter) {
    const auto next = next_event(config, v, t, up, excluded, scratch);
    const double gap = next ? next->gap : beta;
    if (v == y && passes(t, gap, up, tau, beta)) {
      const bool same_direction = up;
      if (link.kind == LinkKind::Cross) return same_direction ? 1 : 0;
      return same_direction ? 0 : 1;
    }
    if (!next || (v == x && passes(t, gap, up, tau, beta))) return -1;
    v = lattice.edge_tail(next->edge) == v ? lattice.edge_head(next->edge) : lattice.edge_tail(next->edge);
    t = next->time;
    if (next->kind == LinkKind::DoubleBar) up = !up;
  }
  throw Error("loop walk did not close");
}

int delta_loops_on_toggle(const LinkConfiguration& config, const Link& link) {
  if (config.contains(link.edge, link.time)) {
    return -delta_loops_on_insert(config, link, std::pair{link.edge, link.time});
  }
  return delta_loops_on_insert(config, link);
}

}  // namespace loopbound
