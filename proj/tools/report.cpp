#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace splitlock::cli {

namespace {

using nlohmann::json;

double to_ms(std::chrono::nanoseconds ns)
{
	return std::chrono::duration<double, std::milli>(ns).count();
}

std::string fmt_ms(double ms)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.3f", ms);
	return buf;
}

// Our identifiers never need quoting, but keep emitted CSV well-formed for
// any net name.
std::string csv_escape(const std::string &field)
{
	if (field.find_first_of(",\"\n") == std::string::npos)
		return field;
	std::string quoted = "\"";
	for (const char c : field) {
		if (c == '"')
			quoted += '"';
		quoted += c;
	}
	quoted += '"';
	return quoted;
}

std::vector<std::string> split_csv_line(const std::string &line)
{
	std::vector<std::string> fields;
	std::string cur;
	bool quoted = false;
	for (std::size_t i = 0; i < line.size(); i++) {
		const char c = line[i];
		if (quoted) {
			if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
				cur += '"';
				i++;
			} else if (c == '"') {
				quoted = false;
			} else {
				cur += c;
			}
		} else if (c == '"') {
			quoted = true;
		} else if (c == ',') {
			fields.push_back(std::move(cur));
			cur.clear();
		} else {
			cur += c;
		}
	}
	fields.push_back(std::move(cur));
	return fields;
}

std::size_t parse_count(const std::string &field, const char *what)
{
	try {
		std::size_t pos = 0;
		const unsigned long long v = std::stoull(field, &pos);
		if (pos != field.size())
			throw std::invalid_argument(field);
		return static_cast<std::size_t>(v);
	} catch (const std::exception &) {
		throw NetlistError("bad " + std::string(what) + " value '" + field + "'");
	}
}

double parse_ms(const std::string &field, const char *what)
{
	try {
		std::size_t pos = 0;
		const double v = std::stod(field, &pos);
		if (pos != field.size() || !std::isfinite(v))
			throw std::invalid_argument(field);
		return v;
	} catch (const std::exception &) {
		throw NetlistError("bad " + std::string(what) + " value '" + field + "'");
	}
}

json parse_json(const std::string &text, std::string_view schema)
{
	json j = json::parse(text, nullptr, false);
	if (j.is_discarded() || !j.is_object())
		throw NetlistError("malformed JSON document");
	if (!j.contains("schema") || !j["schema"].is_string() ||
	    j["schema"].get<std::string>() != schema)
		throw NetlistError("document does not carry schema '" + std::string(schema) + "'");
	return j;
}

} // namespace

std::optional<ReportFormat> report_format_from(std::string_view token)
{
	if (token == "json")
		return ReportFormat::Json;
	if (token == "csv")
		return ReportFormat::Csv;
	if (token == "text")
		return ReportFormat::Text;
	return std::nullopt;
}

std::string_view to_string(ReportFormat format)
{
	switch (format) {
	case ReportFormat::Json:
		return "json";
	case ReportFormat::Csv:
		return "csv";
	case ReportFormat::Text:
		return "text";
	}
	return "?";
}

AttackReport build_attack_report(const Netlist &locked, const MultiKeyResult &result,
				 std::uint64_t oracle_queries, std::size_t workers,
				 double total_wall_ms, bool redact_key)
{
	AttackReport r;
	r.circuit = locked.name();
	r.key_size = locked.key_count();
	r.splitting_effort = result.splitting_effort;
	r.workers = workers;
	r.split_ports = result.split_ports;
	r.oracle_queries = oracle_queries;
	r.wall_min_ms = to_ms(result.wall_min);
	r.wall_mean_ms = to_ms(result.wall_mean);
	r.wall_max_ms = to_ms(result.wall_max);
	r.total_wall_ms = total_wall_ms;
	r.entries.reserve(result.entries.size());
	for (const auto &[cond, sub] : result.entries) {
		AttackEntryReport e;
		e.condition = cond.value;
		e.status = std::string(to_string(sub.status));
		e.dip_count = sub.dip_count;
		e.wall_ms = to_ms(sub.wall_time);
		e.key = redact_key ? std::string(kRedactedKey) : bits_to_string(sub.key.bits);
		r.entries.push_back(std::move(e));
	}
	return r;
}

std::string to_json(const AttackReport &r)
{
	json j;
	j["schema"] = kAttackReportSchema;
	j["circuit"] = r.circuit;
	j["key_size"] = r.key_size;
	j["splitting_effort"] = r.splitting_effort;
	j["workers"] = r.workers;
	j["split_ports"] = r.split_ports;
	j["oracle_queries"] = r.oracle_queries;
	j["wall_ms"] = {{"min", r.wall_min_ms},
			{"mean", r.wall_mean_ms},
			{"max", r.wall_max_ms},
			{"total", r.total_wall_ms}};
	j["entries"] = json::array();
	for (const AttackEntryReport &e : r.entries) {
		j["entries"].push_back({{"condition", e.condition},
					{"status", e.status},
					{"dip_count", e.dip_count},
					{"wall_ms", e.wall_ms},
					{"key", e.key}});
	}
	if (r.verified)
		j["verified"] = *r.verified;
	return j.dump(2) + "\n";
}

AttackReport attack_report_from_json(const std::string &text)
{
	const json j = parse_json(text, kAttackReportSchema);
	try {
		AttackReport r;
		r.circuit = j.at("circuit").get<std::string>();
		r.key_size = j.at("key_size").get<std::size_t>();
		r.splitting_effort = j.at("splitting_effort").get<std::size_t>();
		r.workers = j.at("workers").get<std::size_t>();
		r.split_ports = j.at("split_ports").get<std::vector<std::string>>();
		r.oracle_queries = j.at("oracle_queries").get<std::uint64_t>();
		const json &wall = j.at("wall_ms");
		r.wall_min_ms = wall.at("min").get<double>();
		r.wall_mean_ms = wall.at("mean").get<double>();
		r.wall_max_ms = wall.at("max").get<double>();
		r.total_wall_ms = wall.at("total").get<double>();
		for (const json &je : j.at("entries")) {
			AttackEntryReport e;
			e.condition = je.at("condition").get<std::string>();
			e.status = je.at("status").get<std::string>();
			e.dip_count = je.at("dip_count").get<std::size_t>();
			e.wall_ms = je.at("wall_ms").get<double>();
			e.key = je.at("key").get<std::string>();
			r.entries.push_back(std::move(e));
		}
		if (j.contains("verified"))
			r.verified = j.at("verified").get<bool>();
		return r;
	} catch (const json::exception &ex) {
		throw NetlistError("malformed attack report: " + std::string(ex.what()));
	}
}

std::string to_csv(const AttackReport &r)
{
	std::ostringstream out;
	out << "# " << kAttackReportSchema << "\n";
	out << "circuit,key_size,splitting_effort,workers,oracle_queries,"
	       "condition,status,dip_count,wall_ms,key\n";
	for (const AttackEntryReport &e : r.entries) {
		out << csv_escape(r.circuit) << ',' << r.key_size << ',' << r.splitting_effort
		    << ',' << r.workers << ',' << r.oracle_queries << ',' << e.condition << ','
		    << e.status << ',' << e.dip_count << ',' << fmt_ms(e.wall_ms) << ','
		    << csv_escape(e.key) << '\n';
	}
	return out.str();
}

std::string to_text(const AttackReport &r)
{
	std::ostringstream out;
	out << "circuit: " << r.circuit << "\n";
	out << "key size: " << r.key_size << "\n";
	out << "splitting effort: " << r.splitting_effort;
	if (!r.split_ports.empty()) {
		out << " (split ports:";
		for (const std::string &p : r.split_ports)
			out << ' ' << p;
		out << ')';
	}
	out << "\n";
	out << "workers: " << r.workers << "\n";
	out << "oracle queries: " << r.oracle_queries << "\n";
	for (const AttackEntryReport &e : r.entries) {
		out << "entry";
		if (!e.condition.empty())
			out << ' ' << e.condition;
		out << ": " << e.status << " dips=" << e.dip_count
		    << " wall_ms=" << fmt_ms(e.wall_ms) << " key=" << e.key << "\n";
	}
	out << "wall ms: min=" << fmt_ms(r.wall_min_ms) << " mean=" << fmt_ms(r.wall_mean_ms)
	    << " max=" << fmt_ms(r.wall_max_ms) << " total=" << fmt_ms(r.total_wall_ms) << "\n";
	if (r.verified)
		out << "equivalence: " << (*r.verified ? "confirmed" : "refuted") << "\n";
	return out.str();
}

std::string render(const AttackReport &r, ReportFormat format)
{
	switch (format) {
	case ReportFormat::Json:
		return to_json(r);
	case ReportFormat::Csv:
		return to_csv(r);
	case ReportFormat::Text:
		return to_text(r);
	}
	return {};
}

std::string bench_csv_header()
{
	std::string header = "# ";
	header += kBenchSchema;
	header += "\ncircuit,scheme,key_size,splitting_effort,entries,dip_max,dip_total,"
		  "wall_min_ms,wall_mean_ms,wall_max_ms,max_over_baseline,status\n";
	return header;
}

std::string to_csv_row(const BenchRow &row)
{
	std::ostringstream out;
	out << csv_escape(row.circuit) << ',' << row.scheme << ',' << row.key_size << ','
	    << row.splitting_effort << ',' << row.entries << ',' << row.dip_max << ','
	    << row.dip_total << ',' << fmt_ms(row.wall_min_ms) << ',' << fmt_ms(row.wall_mean_ms)
	    << ',' << fmt_ms(row.wall_max_ms) << ',';
	if (row.max_over_baseline) {
		char buf[64];
		std::snprintf(buf, sizeof buf, "%.6f", *row.max_over_baseline);
		out << buf;
	}
	out << ',' << row.status << '\n';
	return out.str();
}

std::vector<BenchRow> bench_rows_from_csv(const std::string &text)
{
	std::istringstream in(text);
	std::string line;
	if (!std::getline(in, line) || line != "# " + std::string(kBenchSchema))
		throw NetlistError("document does not carry schema '" + std::string(kBenchSchema) +
				   "'");
	const std::string header = "circuit,scheme,key_size,splitting_effort,entries,dip_max,"
				   "dip_total,wall_min_ms,wall_mean_ms,wall_max_ms,"
				   "max_over_baseline,status";
	if (!std::getline(in, line) || line != header)
		throw NetlistError("unexpected sweep CSV header");

	std::vector<BenchRow> rows;
	while (std::getline(in, line)) {
		if (line.empty())
			continue;
		const std::vector<std::string> f = split_csv_line(line);
		if (f.size() != 12)
			throw NetlistError("sweep CSV row has " + std::to_string(f.size()) +
					   " fields, expected 12");
		BenchRow row;
		row.circuit = f[0];
		row.scheme = f[1];
		row.key_size = parse_count(f[2], "key_size");
		row.splitting_effort = parse_count(f[3], "splitting_effort");
		row.entries = parse_count(f[4], "entries");
		row.dip_max = parse_count(f[5], "dip_max");
		row.dip_total = parse_count(f[6], "dip_total");
		row.wall_min_ms = parse_ms(f[7], "wall_min_ms");
		row.wall_mean_ms = parse_ms(f[8], "wall_mean_ms");
		row.wall_max_ms = parse_ms(f[9], "wall_max_ms");
		if (!f[10].empty())
			row.max_over_baseline = parse_ms(f[10], "max_over_baseline");
		row.status = f[11];
		rows.push_back(std::move(row));
	}
	return rows;
}

std::string to_json(const LockMetadata &m)
{
	json j;
	j["schema"] = kLockMetadataSchema;
	j["source"] = m.source;
	j["scheme"] = m.scheme;
	j["key_size"] = m.key_size;
	j["rng_seed"] = m.rng_seed;
	j["correct_key"] = m.correct_key;
	j["key_ports"] = m.key_ports;
	j["tap_nets"] = m.tap_nets;
	if (m.protected_output.empty())
		j["protected_output"] = nullptr;
	else
		j["protected_output"] = m.protected_output;
	return j.dump(2) + "\n";
}

LockMetadata lock_metadata_from_json(const std::string &text)
{
	const json j = parse_json(text, kLockMetadataSchema);
	try {
		LockMetadata m;
		m.source = j.at("source").get<std::string>();
		m.scheme = j.at("scheme").get<std::string>();
		m.key_size = j.at("key_size").get<std::size_t>();
		m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
		m.correct_key = j.at("correct_key").get<std::string>();
		m.key_ports = j.at("key_ports").get<std::vector<std::string>>();
		m.tap_nets = j.at("tap_nets").get<std::vector<std::string>>();
		if (!j.at("protected_output").is_null())
			m.protected_output = j.at("protected_output").get<std::string>();
		return m;
	} catch (const json::exception &ex) {
		throw NetlistError("malformed lock metadata: " + std::string(ex.what()));
	}
}

} // namespace splitlock::cli
