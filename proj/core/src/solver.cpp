#include "splitlock/solver.hpp"

#include <algorithm>
#include <cmath>

namespace splitlock::sat {

namespace {

constexpr double kVarDecay = 0.95;
constexpr double kClauseDecay = 0.999;
constexpr double kRescaleLimit = 1e100;
constexpr int kRestartBase = 100;

// Luby restart sequence: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
double luby(double y, int i)
{
	int size = 1, seq = 0;
	while (size < i + 1) {
		seq++;
		size = 2 * size + 1;
	}
	while (size - 1 != i) {
		size = (size - 1) >> 1;
		seq--;
		i = i % size;
	}
	return std::pow(y, seq);
}

} // namespace

Var Solver::new_var()
{
	const Var v = var_count();
	assigns_.push_back(Value::Undef);
	polarity_.push_back(1);
	activity_.push_back(0.0);
	level_.push_back(0);
	reason_.push_back(kNoReason);
	seen_.push_back(0);
	heap_pos_.push_back(-1);
	watches_.emplace_back();
	watches_.emplace_back();
	heap_insert(v);
	return v;
}

bool Solver::heap_less(Var a, Var b) const
{
	const double aa = activity_[static_cast<std::size_t>(a)];
	const double ab = activity_[static_cast<std::size_t>(b)];
	if (aa != ab)
		return aa > ab;
	return a < b;
}

void Solver::heap_insert(Var v)
{
	if (heap_pos_[static_cast<std::size_t>(v)] >= 0)
		return;
	heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(heap_.size());
	heap_.push_back(v);
	heap_sift_up(static_cast<int>(heap_.size()) - 1);
}

void Solver::heap_sift_up(int i)
{
	const Var v = heap_[static_cast<std::size_t>(i)];
	while (i > 0) {
		const int parent = (i - 1) >> 1;
		if (!heap_less(v, heap_[static_cast<std::size_t>(parent)]))
			break;
		heap_[static_cast<std::size_t>(i)] = heap_[static_cast<std::size_t>(parent)];
		heap_pos_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(i)])] = i;
		i = parent;
	}
	heap_[static_cast<std::size_t>(i)] = v;
	heap_pos_[static_cast<std::size_t>(v)] = i;
}

void Solver::heap_sift_down(int i)
{
	const Var v = heap_[static_cast<std::size_t>(i)];
	const int n = static_cast<int>(heap_.size());
	while (true) {
		int child = 2 * i + 1;
		if (child >= n)
			break;
		if (child + 1 < n &&
		    heap_less(heap_[static_cast<std::size_t>(child + 1)], heap_[static_cast<std::size_t>(child)]))
			child++;
		if (!heap_less(heap_[static_cast<std::size_t>(child)], v))
			break;
		heap_[static_cast<std::size_t>(i)] = heap_[static_cast<std::size_t>(child)];
		heap_pos_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(i)])] = i;
		i = child;
	}
	heap_[static_cast<std::size_t>(i)] = v;
	heap_pos_[static_cast<std::size_t>(v)] = i;
}

void Solver::bump_var(Var v)
{
	activity_[static_cast<std::size_t>(v)] += var_inc_;
	if (activity_[static_cast<std::size_t>(v)] > kRescaleLimit) {
		for (double &a : activity_)
			a *= 1e-100;
		var_inc_ *= 1e-100;
	}
	const int pos = heap_pos_[static_cast<std::size_t>(v)];
	if (pos >= 0)
		heap_sift_up(pos);
}

void Solver::bump_clause(Clause &c)
{
	c.activity += cla_inc_;
	if (c.activity > kRescaleLimit) {
		for (int ref : learnt_refs_)
			store_[static_cast<std::size_t>(ref)].activity *= 1e-100;
		cla_inc_ *= 1e-100;
	}
}

void Solver::decay_activities()
{
	var_inc_ /= kVarDecay;
	cla_inc_ /= kClauseDecay;
}

void Solver::attach(int cref)
{
	const Clause &c = store_[static_cast<std::size_t>(cref)];
	watches_[static_cast<std::size_t>((~c.lits[0]).x)].push_back({cref, c.lits[1]});
	watches_[static_cast<std::size_t>((~c.lits[1]).x)].push_back({cref, c.lits[0]});
}

bool Solver::add_clause(std::vector<Lit> lits)
{
	if (!ok_)
		return false;
	cancel_until(0);

	std::sort(lits.begin(), lits.end(), [](Lit a, Lit b) { return a.x < b.x; });
	std::vector<Lit> out;
	Lit prev = lit_undef;
	for (Lit p : lits) {
		if (value(p) == Value::True || p == ~prev)
			return true; // satisfied at root or tautology
		if (value(p) != Value::False && !(p == prev))
			out.push_back(p);
		prev = p;
	}

	if (out.empty()) {
		ok_ = false;
		return false;
	}
	if (out.size() == 1) {
		unchecked_enqueue(out[0]);
		ok_ = propagate() == kNoReason;
		return ok_;
	}
	const int cref = static_cast<int>(store_.size());
	store_.push_back(Clause{std::move(out), 0.0, false, false});
	problem_refs_.push_back(cref);
	attach(cref);
	return true;
}

void Solver::unchecked_enqueue(Lit p, int from)
{
	const auto v = static_cast<std::size_t>(var(p));
	assigns_[v] = sign(p) ? Value::False : Value::True;
	level_[v] = decision_level();
	reason_[v] = from;
	trail_.push_back(p);
}

int Solver::propagate()
{
	int confl = kNoReason;
	while (qhead_ < trail_.size()) {
		const Lit p = trail_[qhead_++];
		propagations_++;
		std::vector<Watcher> &ws = watches_[static_cast<std::size_t>(p.x)];
		std::size_t i = 0, j = 0;
		while (i < ws.size()) {
			const Watcher w = ws[i];
			if (value(w.blocker) == Value::True) {
				ws[j++] = ws[i++];
				continue;
			}
			Clause &c = store_[static_cast<std::size_t>(w.cref)];
			const Lit false_lit = ~p;
			if (c.lits[0] == false_lit)
				std::swap(c.lits[0], c.lits[1]);
			i++;

			const Lit first = c.lits[0];
			if (value(first) == Value::True) {
				ws[j++] = {w.cref, first};
				continue;
			}
			bool moved = false;
			for (std::size_t k = 2; k < c.lits.size(); k++) {
				if (value(c.lits[k]) != Value::False) {
					std::swap(c.lits[1], c.lits[k]);
					watches_[static_cast<std::size_t>((~c.lits[1]).x)].push_back(
					    {w.cref, first});
					moved = true;
					break;
				}
			}
			if (moved)
				continue;

			ws[j++] = {w.cref, first};
			if (value(first) == Value::False) {
				confl = w.cref;
				qhead_ = trail_.size();
				while (i < ws.size())
					ws[j++] = ws[i++];
			} else {
				unchecked_enqueue(first, w.cref);
			}
		}
		ws.resize(j);
		if (confl != kNoReason)
			break;
	}
	return confl;
}

bool Solver::lit_redundant(Lit p) const
{
	const int r = reason_[static_cast<std::size_t>(var(p))];
	if (r == kNoReason)
		return false;
	const Clause &c = store_[static_cast<std::size_t>(r)];
	for (std::size_t k = 1; k < c.lits.size(); k++) {
		const auto v = static_cast<std::size_t>(var(c.lits[k]));
		if (!seen_[v] && level_[v] > 0)
			return false;
	}
	return true;
}

void Solver::analyze(int confl, std::vector<Lit> &learnt, int &bt_level)
{
	learnt.clear();
	learnt.push_back(lit_undef); // slot for the asserting literal

	Lit p = lit_undef;
	int path = 0;
	int index = static_cast<int>(trail_.size()) - 1;

	do {
		Clause &c = store_[static_cast<std::size_t>(confl)];
		if (c.learnt)
			bump_clause(c);
		for (std::size_t k = (p == lit_undef) ? 0 : 1; k < c.lits.size(); k++) {
			const Lit q = c.lits[k];
			const auto v = static_cast<std::size_t>(var(q));
			if (seen_[v] || level_[v] == 0)
				continue;
			seen_[v] = 1;
			bump_var(var(q));
			if (level_[v] >= decision_level())
				path++;
			else
				learnt.push_back(q);
		}
		while (!seen_[static_cast<std::size_t>(var(trail_[static_cast<std::size_t>(index)]))])
			index--;
		p = trail_[static_cast<std::size_t>(index)];
		confl = reason_[static_cast<std::size_t>(var(p))];
		seen_[static_cast<std::size_t>(var(p))] = 0;
		path--;
		index--;
	} while (path > 0);
	learnt[0] = ~p;

	std::vector<Lit> kept;
	kept.push_back(learnt[0]);
	for (std::size_t k = 1; k < learnt.size(); k++) {
		if (!lit_redundant(learnt[k]))
			kept.push_back(learnt[k]);
	}
	for (std::size_t k = 1; k < learnt.size(); k++)
		seen_[static_cast<std::size_t>(var(learnt[k]))] = 0;
	learnt = std::move(kept);

	bt_level = 0;
	if (learnt.size() > 1) {
		std::size_t max_i = 1;
		for (std::size_t k = 2; k < learnt.size(); k++) {
			if (level_[static_cast<std::size_t>(var(learnt[k]))] >
			    level_[static_cast<std::size_t>(var(learnt[max_i]))])
				max_i = k;
		}
		std::swap(learnt[1], learnt[max_i]);
		bt_level = level_[static_cast<std::size_t>(var(learnt[1]))];
	}
}

void Solver::cancel_until(int level)
{
	if (decision_level() <= level)
		return;
	const int bound = trail_lim_[static_cast<std::size_t>(level)];
	for (int i = static_cast<int>(trail_.size()) - 1; i >= bound; i--) {
		const Lit p = trail_[static_cast<std::size_t>(i)];
		const auto v = static_cast<std::size_t>(var(p));
		assigns_[v] = Value::Undef;
		polarity_[v] = sign(p) ? 1 : 0;
		heap_insert(var(p));
	}
	trail_.resize(static_cast<std::size_t>(bound));
	trail_lim_.resize(static_cast<std::size_t>(level));
	qhead_ = trail_.size();
}

Var Solver::pick_branch_var()
{
	while (!heap_.empty()) {
		const Var v = heap_[0];
		const Var last = heap_.back();
		heap_.pop_back();
		heap_pos_[static_cast<std::size_t>(v)] = -1;
		if (!heap_.empty() && last != v) {
			heap_[0] = last;
			heap_pos_[static_cast<std::size_t>(last)] = 0;
			heap_sift_down(0);
		}
		if (value_var(v) == Value::Undef)
			return v;
	}
	return -1;
}

bool Solver::locked(int cref) const
{
	const Clause &c = store_[static_cast<std::size_t>(cref)];
	return value(c.lits[0]) == Value::True &&
	       reason_[static_cast<std::size_t>(var(c.lits[0]))] == cref;
}

void Solver::rebuild_watches()
{
	for (auto &w : watches_)
		w.clear();
	for (int ref : problem_refs_)
		attach(ref);
	for (int ref : learnt_refs_)
		attach(ref);
}

void Solver::reduce_db()
{
	std::vector<int> sorted = learnt_refs_;
	std::sort(sorted.begin(), sorted.end(), [this](int a, int b) {
		const Clause &ca = store_[static_cast<std::size_t>(a)];
		const Clause &cb = store_[static_cast<std::size_t>(b)];
		if (ca.activity != cb.activity)
			return ca.activity < cb.activity;
		return a < b;
	});
	const std::size_t target = sorted.size() / 2;
	std::size_t removed = 0;
	for (int ref : sorted) {
		if (removed >= target)
			break;
		Clause &c = store_[static_cast<std::size_t>(ref)];
		if (c.lits.size() <= 2 || locked(ref))
			continue;
		c.dead = true;
		c.lits.clear();
		c.lits.shrink_to_fit();
		removed++;
	}
	std::erase_if(learnt_refs_,
		      [this](int ref) { return store_[static_cast<std::size_t>(ref)].dead; });
	rebuild_watches();
	qhead_ = 0; // rescan the trail so the rebuilt watch lists settle
}

// Runs until a conflict budget is exhausted (returns false with done=false),
// the instance is decided (done=true), or an assumption fails.
int Solver::search(int conflict_budget, const std::vector<Lit> &assumptions, bool &done)
{
	int conflict_count = 0;
	std::vector<Lit> learnt;

	while (true) {
		const int confl = propagate();
		if (confl != kNoReason) {
			conflicts_++;
			conflict_count++;
			if (decision_level() == 0) {
				ok_ = false;
				done = true;
				return 0;
			}
			int bt = 0;
			analyze(confl, learnt, bt);
			cancel_until(bt);
			if (learnt.size() == 1) {
				unchecked_enqueue(learnt[0]);
			} else {
				const int cref = static_cast<int>(store_.size());
				store_.push_back(Clause{learnt, cla_inc_, true, false});
				learnt_refs_.push_back(cref);
				attach(cref);
				unchecked_enqueue(learnt[0], cref);
			}
			decay_activities();
			continue;
		}

		if (conflict_count >= conflict_budget) {
			cancel_until(0);
			done = false;
			return 0;
		}
		if (static_cast<double>(learnt_refs_.size()) -
			static_cast<double>(trail_.size()) >=
		    max_learnts_) {
			reduce_db();
			max_learnts_ *= 1.3;
		}

		Lit next = lit_undef;
		while (decision_level() < static_cast<int>(assumptions.size())) {
			const Lit p = assumptions[static_cast<std::size_t>(decision_level())];
			if (value(p) == Value::True) {
				new_decision_level();
			} else if (value(p) == Value::False) {
				done = true;
				return 0; // assumptions conflict with the formula
			} else {
				next = p;
				break;
			}
		}
		if (next == lit_undef) {
			const Var v = pick_branch_var();
			if (v < 0) {
				done = true;
				return 1; // full model
			}
			decisions_++;
			next = mk_lit(v, polarity_[static_cast<std::size_t>(v)] != 0);
		}
		new_decision_level();
		unchecked_enqueue(next);
	}
}

bool Solver::solve(const std::vector<Lit> &assumptions)
{
	if (!ok_)
		return false;
	cancel_until(0);
	if (max_learnts_ < 1.0)
		max_learnts_ = std::max(5000.0, static_cast<double>(problem_refs_.size()) / 3.0);

	bool sat = false;
	for (int restarts = 0;; restarts++) {
		bool done = false;
		const int budget =
		    static_cast<int>(std::min(luby(2.0, restarts) * kRestartBase, 1e8));
		const int status = search(budget, assumptions, done);
		if (done) {
			sat = status != 0;
			break;
		}
	}

	if (sat) {
		model_ = assigns_;
	} else {
		model_.clear();
	}
	cancel_until(0);
	return sat;
}

} // namespace splitlock::sat
