#include "qtherm/expander.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "qtherm/rmt.hpp"

namespace qtherm::expander {

namespace {

struct LocalSpace {
  std::vector<long> labels;  // distinct bin labels, ascending
  std::vector<int> begin;
  std::vector<int> rank;
  int n = 0;

  int slot(long k) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), k);
    if (it == labels.end() || *it != k) return -1;
    return static_cast<int>(it - labels.begin());
  }
};

LocalSpace make_space(const std::vector<long>& ks, const std::vector<int>& ranks) {
  std::map<long, int> m;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    auto [it, fresh] = m.emplace(ks[i], ranks[i]);
    if (!fresh && it->second != ranks[i]) throw ValidationError("inconsistent ranks for a repeated bin");
  }
  LocalSpace s;
  for (auto [k, r] : m) {
    if (r < 1) throw ValidationError("sector bin has rank 0");
    s.labels.push_back(k);
    s.begin.push_back(s.n);
    s.rank.push_back(r);
    s.n += r;
  }
  return s;
}

std::vector<long> sector_labels(const BlockSector& s) {
  return {s.k1, s.k2, s.k1 + s.kprime, s.k2 + s.kprime};
}

void check_sector(const BlockSector& s) {
  if (s.k1 <= s.k2) throw ValidationError("sector needs nu1 > nu2");
}

// Accumulates c * (X -> A X B) on the sector coordinates.
class SectorAssembler {
 public:
  SectorAssembler(int n, const std::vector<std::pair<int, int>>& entries)
      : n_(n), entries_(entries), pos_(n * n, -1), M_(Mat::Zero(entries.size(), entries.size())) {
    for (std::size_t p = 0; p < entries.size(); ++p) pos_[entries[p].first + n * entries[p].second] = p;
  }

  void add(const Mat& A, const Mat& B, cplx c) {
    std::vector<std::vector<int>> acol(n_), brow(n_);
    for (int k = 0; k < n_; ++k)
      for (int i = 0; i < n_; ++i)
        if (A(i, k) != 0.0) acol[k].push_back(i);
    for (int l = 0; l < n_; ++l)
      for (int j = 0; j < n_; ++j)
        if (B(l, j) != 0.0) brow[l].push_back(j);
    for (std::size_t q = 0; q < entries_.size(); ++q) {
      const auto [k, l] = entries_[q];
      for (int i : acol[k]) {
        const cplx ak = c * A(i, k);
        for (int j : brow[l]) {
          const int p = pos_[i + n_ * j];
          if (p >= 0) M_(p, q) += ak * B(l, j);
        }
      }
    }
  }

  Mat take() { return std::move(M_); }

 private:
  int n_;
  const std::vector<std::pair<int, int>>& entries_;
  std::vector<long> pos_;
  Mat M_;
};

SectorBlock assemble(const BlockSector& sector, const LocalSpace& space,
                     const std::vector<Mat>& Aw, const SectorRates& rates, double nu0,
                     std::string basis) {
  check_sector(sector);
  SectorBlock b;
  b.sector = sector;
  b.basis = std::move(basis);
  for (long k : sector_labels(sector)) {
    const int s = space.slot(k);
    b.bin_begin.push_back(space.begin[s]);
    b.bin_rank.push_back(space.rank[s]);
  }
  auto add_block = [&](int row_bin, int col_bin) {
    for (int j = 0; j < b.bin_rank[col_bin]; ++j)
      for (int i = 0; i < b.bin_rank[row_bin]; ++i)
        b.entries.emplace_back(b.bin_begin[row_bin] + i, b.bin_begin[col_bin] + j);
  };
  add_block(0, 2);
  add_block(1, 3);
  if (static_cast<long>(b.entries.size()) > kMaxSectorEntries)
    throw CapacityError("sector has " + std::to_string(b.entries.size()) + " coordinates, limit " +
                        std::to_string(kMaxSectorEntries));

  // local Gibbs weights exp(-beta label), relative to the lowest bin
  RVec s(space.n);
  for (std::size_t t = 0; t < space.labels.size(); ++t)
    for (int i = 0; i < space.rank[t]; ++i)
      s(space.begin[t] + i) = std::exp(-rates.beta * (space.labels[t] - space.labels[0]) * nu0);
  b.weights.resize(b.entries.size());
  for (std::size_t p = 0; p < b.entries.size(); ++p)
    b.weights(p) = std::sqrt(s(b.entries[p].first) * s(b.entries[p].second));

  const Mat I = Mat::Identity(space.n, space.n);
  SectorAssembler asmb(space.n, b.entries);
  for (const Mat& A : Aw) {
    const Mat Ad = A.adjoint();
    const Mat Kup = Ad * A;    // A(w)^dag A(w)
    const Mat Kdown = A * Ad;  // A(-w)^dag A(-w)
    asmb.add(Ad, A, rates.up);
    asmb.add(Kup, I, -0.5 * rates.up);
    asmb.add(I, Kup, -0.5 * rates.up);
    asmb.add(A, Ad, rates.down);
    asmb.add(Kdown, I, -0.5 * rates.down);
    asmb.add(I, Kdown, -0.5 * rates.down);
  }
  b.matrix = asmb.take();
  b.local_index.resize(space.n, -1);
  return b;
}

}  // namespace

SectorRates sector_rates(const Rates& rates, double omega) {
  SectorRates s;
  s.up = rates(omega);
  s.down = rates(-omega);
  s.beta = rates.bath ? rates.bath->beta : 0.0;
  return s;
}

SectorBlock build_sector(const BlockSector& sector, const std::vector<int>& ranks,
                         const std::vector<Mat>& a21, const std::vector<Mat>& a21p,
                         const SectorRates& rates, double nu0) {
  check_sector(sector);
  const auto ks = sector_labels(sector);
  if (ranks.size() != 4) throw ValidationError("build_sector needs ranks of bins 1, 2, 1', 2'");
  if (sector.kprime != 0 && a21p.size() != a21.size())
    throw ValidationError("displaced blocks missing for an off-diagonal sector");
  LocalSpace space = make_space(ks, ranks);
  std::vector<Mat> Aw;
  const int b1 = space.begin[space.slot(ks[0])], b2 = space.begin[space.slot(ks[1])];
  const int b1p = space.begin[space.slot(ks[2])], b2p = space.begin[space.slot(ks[3])];
  for (std::size_t a = 0; a < a21.size(); ++a) {
    Mat A = Mat::Zero(space.n, space.n);
    if (a21[a].rows() != ranks[1] || a21[a].cols() != ranks[0])
      throw ValidationError("A_21 block has wrong shape");
    A.block(b2, b1, ranks[1], ranks[0]) = a21[a];
    if (sector.kprime != 0) {
      if (a21p[a].rows() != ranks[3] || a21p[a].cols() != ranks[2])
        throw ValidationError("A_2'1' block has wrong shape");
      A.block(b2p, b1p, ranks[3], ranks[2]) += a21p[a];
    }
    Aw.push_back(std::move(A));
  }
  return assemble(sector, space, Aw, rates, nu0, "sector");
}

namespace {

SectorBlock from_model(const RoundedSpectrum& r, const davies::InteractionSet& ints,
                       const Rates& rates, const BlockSector& sector) {
  check_sector(sector);
  ints.validate();
  if (ints.ops.front().rows() != r.dim()) throw ValidationError("interaction size does not match spectrum");
  const auto ks = sector_labels(sector);
  std::vector<int> ranks;
  std::vector<int> eig_begin;
  for (long k : ks) {
    const int p = r.find(k);
    if (p < 0)
      throw ValidationError("sector bin " + std::to_string(k) + " (energy " + std::to_string(k * r.nu0) +
                            ") is not present in the rounded spectrum");
    ranks.push_back(r.bins[p].rank());
    eig_begin.push_back(r.bins[p].begin);
  }
  LocalSpace space = make_space(ks, ranks);
  auto loc = [&](int which) { return space.begin[space.slot(ks[which])]; };
  std::vector<Mat> Aw;
  for (const Mat& Afull : ints.ops) {
    Mat A = Mat::Zero(space.n, space.n);
    A.block(loc(1), loc(0), ranks[1], ranks[0]) = Afull.block(eig_begin[1], eig_begin[0], ranks[1], ranks[0]);
    if (sector.kprime != 0)
      A.block(loc(3), loc(2), ranks[3], ranks[2]) =
          Afull.block(eig_begin[3], eig_begin[2], ranks[3], ranks[2]);
    Aw.push_back(std::move(A));
  }
  SectorBlock b = assemble(sector, space, Aw, sector_rates(rates, sector.omega() * r.nu0), r.nu0,
                           "energy-sector");
  for (std::size_t t = 0; t < space.labels.size(); ++t) {
    const auto& bin = r.bins[r.find(space.labels[t])];
    for (int i = 0; i < space.rank[t]; ++i) b.local_index[space.begin[t] + i] = bin.begin + i;
  }
  return b;
}

}  // namespace

SectorBlock block_lindbladian_diag(const RoundedSpectrum& r, const davies::InteractionSet& ints,
                                   const Rates& rates, const BlockSector& sector) {
  if (sector.kprime != 0) throw ValidationError("block_lindbladian_diag needs k' = 0");
  return from_model(r, ints, rates, sector);
}

SectorBlock block_lindbladian_offdiag(const RoundedSpectrum& r, const davies::InteractionSet& ints,
                                      const Rates& rates, const BlockSector& sector) {
  if (sector.kprime == 0)
    throw ValidationError("k' = 0 is the diagonal sector; use block_lindbladian_diag");
  return from_model(r, ints, rates, sector);
}

SectorBlock hatted_expectation(const SectorBlock& block) {
  SectorBlock out = block;
  const int m = block.size();
  for (int q = 0; q < m; ++q) {
    const bool col_pop = block.entries[q].first == block.entries[q].second;
    for (int p = 0; p < m; ++p) {
      if (p == q) continue;
      const bool row_pop = block.entries[p].first == block.entries[p].second;
      if (!(row_pop && col_pop)) out.matrix(p, q) = 0.0;
    }
  }
  out.basis = block.basis + "+hatted";
  return out;
}

std::vector<cplx> sector_eigenvalues(const SectorBlock& block) {
  return superop::eigenvalues(block.matrix, block.weights);
}

namespace {

std::pair<double, double> top_and_gap(const SectorBlock& b) {
  const auto ev = sector_eigenvalues(b);
  if (ev.empty()) return {0.0, 0.0};
  if (b.diagonal()) {
    const double l1 = ev[0].real();
    const double l2 = ev.size() > 1 ? ev[1].real() : l1;
    return {l1, -l2};
  }
  return {ev[0].real(), -ev[0].real()};
}

}  // namespace

ExpanderReport analyze(const SectorBlock& block) {
  ExpanderReport rep;
  auto [top, gap] = top_and_gap(block);
  rep.lambda_top = top;
  rep.gap = gap;
  const SectorBlock hat = hatted_expectation(block);
  rep.expected_gap = top_and_gap(hat).second;
  rep.deviation = superop::weighted_spectral_norm(block.matrix - hat.matrix, block.weights);
  rep.ratio = rep.expected_gap > 0 ? rep.deviation / rep.expected_gap
                                   : std::numeric_limits<double>::infinity();
  return rep;
}

Mat local_gibbs(const SectorBlock& block) {
  if (!block.diagonal()) throw ValidationError("local Gibbs state lives in the diagonal sector");
  const int n = block.bin_begin.empty() ? 0
                : std::max(block.bin_begin[0] + block.bin_rank[0], block.bin_begin[1] + block.bin_rank[1]);
  Mat S = Mat::Zero(n, n);
  // weights of diagonal coordinates are s_i
  for (int p = 0; p < block.size(); ++p) {
    const auto [i, j] = block.entries[p];
    if (i == j) S(i, i) = block.weights(p);
  }
  return S / S.trace();
}

BlockSector mid_spectrum_sector(const RoundedSpectrum& r, long omega_k, long kprime) {
  if (r.dim() == 0) throw ValidationError("empty spectrum");
  if (omega_k < 1) throw ValidationError("sector frequency must be at least one bin");
  const double median = r.energies(r.dim() / 2);
  const long k1 = spectrum::round_half_toward_zero(median / r.nu0);
  return {k1, k1 - omega_k, kprime};
}

SectorBlock gaussian_sector(const BlockSector& sector, const std::vector<int>& ranks, int count,
                            double V, const SectorRates& rates, double nu0, Rng& rng) {
  if (count < 1) throw ValidationError("|a| must be >= 1");
  std::vector<Mat> a21, a21p;
  for (int a = 0; a < count; ++a) {
    a21.push_back(rmt::sample_block({ranks[1], ranks[0], V, false}, rng));
    if (sector.kprime != 0) a21p.push_back(rmt::sample_block({ranks[3], ranks[2], V, false}, rng));
  }
  return build_sector(sector, ranks, a21, a21p, rates, nu0);
}

std::vector<ScanRow> scan_gaps(const ScanConfig& cfg, int jobs) {
  std::vector<ScanRow> rows(cfg.points.size());
  if (cfg.points.empty()) return rows;
  Rates rates;
  rates.constant = cfg.gamma_constant;
  if (!cfg.constant_rates) rates.bath = bath::BathProfile{cfg.beta, cfg.bath_delta};

  std::map<int, spectrum::SpectralModel> models;
  for (const auto& p : cfg.points) {
    if (models.count(p.L)) continue;
    spectrum::SpinChainParams params;
    params.L = p.L;
    try {
      params.validate();
      models.emplace(p.L, spectrum::diagonalize(spectrum::build_chain(params)));
    } catch (const std::exception&) {
      // recorded per point below
    }
  }

  auto run_point = [&](std::size_t idx) {
    const ScanPoint& p = cfg.points[idx];
    ScanRow& row = rows[idx];
    row.point = p;
    try {
      auto it = models.find(p.L);
      if (it == models.end()) {
        spectrum::SpinChainParams params;
        params.L = p.L;
        params.validate();
        throw ValidationError("could not diagonalize chain of length " + std::to_string(p.L));
      }
      const auto& model = it->second;
      const auto r = spectrum::round_spectrum(model, p.nu0);
      BlockSector sector = mid_spectrum_sector(r, p.omega_k, p.kprime);
      const long shift = spectrum::round_half_toward_zero(p.nu1_offset / p.nu0);
      sector.k1 += shift;
      sector.k2 += shift;
      std::vector<int> ranks;
      for (long k : sector_labels(sector)) {
        const int pos = r.find(k);
        if (pos < 0) throw ValidationError("sector bin " + std::to_string(k) + " is empty");
        ranks.push_back(r.bins[pos].rank());
      }
      row.rank1 = ranks[0];
      row.rank2 = ranks[1];
      SectorBlock block;
      if (p.gaussian) {
        Rng rng = stream(p.seed, 0);
        block = gaussian_sector(sector, ranks, p.count, cfg.V,
                                sector_rates(rates, sector.omega() * p.nu0), p.nu0, rng);
      } else {
        const auto ints = davies::make_interactions(model, p.family, p.L, p.count);
        block = sector.kprime == 0 ? block_lindbladian_diag(r, ints, rates, sector)
                                   : block_lindbladian_offdiag(r, ints, rates, sector);
      }
      row.report = analyze(block);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(cfg.points.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < cfg.points.size(); ++i) run_point(i);
    return rows;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= cfg.points.size()) return;
          i = next++;
        }
        run_point(i);
      }
    });
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace qtherm::expander
