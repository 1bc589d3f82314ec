#include "splitlock/bench_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace splitlock {

namespace {

bool is_name_char(char c)
{
	return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' || c == ']' || c == '$' || c == '/' ||
	       c == '\'' || c == '-';
}

std::string_view strip(std::string_view s)
{
	while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
		s.remove_prefix(1);
	while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
		s.remove_suffix(1);
	return s;
}

// INPUT(x) / OUTPUT(x) lines.
std::optional<std::string> parse_port_decl(std::string_view line, std::string_view keyword, int lineno)
{
	if (line.size() < keyword.size())
		return std::nullopt;
	std::string up(line.substr(0, keyword.size()));
	for (auto &c : up)
		c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
	if (up != keyword)
		return std::nullopt;
	std::string_view rest = strip(line.substr(keyword.size()));
	if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')')
		throw NetlistError("malformed " + std::string(keyword) + " declaration", lineno);
	std::string_view name = strip(rest.substr(1, rest.size() - 2));
	if (name.empty())
		throw NetlistError("empty port name in " + std::string(keyword) + " declaration", lineno);
	for (char c : name)
		if (!is_name_char(c))
			throw NetlistError("bad character '" + std::string(1, c) + "' in port name", lineno);
	return std::string(name);
}

} // namespace

Netlist parse_bench(std::istream &text, std::string name, std::string_view key_prefix)
{
	std::vector<std::string> inputs;
	std::vector<std::string> key_inputs;
	std::vector<std::string> outputs;
	std::vector<Gate> gates;
	std::unordered_map<std::string, int> def_line; // net definitions, for line-numbered errors
	std::vector<int> gate_lines;
	std::vector<std::pair<std::string, int>> output_decls;

	auto define = [&](const std::string &net, int lineno) {
		auto [it, inserted] = def_line.emplace(net, lineno);
		if (!inserted)
			throw NetlistError("duplicate definition of '" + net + "' (first defined on line " +
					   std::to_string(it->second) + ")", lineno);
	};

	std::string raw;
	int lineno = 0;
	while (std::getline(text, raw)) {
		++lineno;
		std::string_view line = raw;
		if (auto hash = line.find('#'); hash != std::string_view::npos)
			line = line.substr(0, hash);
		line = strip(line);
		if (line.empty())
			continue;

		if (auto port = parse_port_decl(line, "INPUT", lineno)) {
			define(*port, lineno);
			if (!key_prefix.empty() && port->rfind(key_prefix, 0) == 0)
				key_inputs.push_back(std::move(*port));
			else
				inputs.push_back(std::move(*port));
			continue;
		}
		if (auto port = parse_port_decl(line, "OUTPUT", lineno)) {
			output_decls.emplace_back(*port, lineno);
			outputs.push_back(std::move(*port));
			continue;
		}

		auto eq = line.find('=');
		if (eq == std::string_view::npos)
			throw NetlistError("expected INPUT/OUTPUT declaration or '<net> = KIND(...)'", lineno);
		std::string out_net(strip(line.substr(0, eq)));
		if (out_net.empty())
			throw NetlistError("missing net name before '='", lineno);
		std::string_view rhs = strip(line.substr(eq + 1));
		auto open = rhs.find('(');
		if (open == std::string_view::npos || rhs.back() != ')')
			throw NetlistError("malformed gate definition for '" + out_net + "'", lineno);
		std::string_view kind_token = strip(rhs.substr(0, open));
		auto kind = gate_kind_from(kind_token);
		if (!kind)
			throw NetlistError("unknown gate kind '" + std::string(kind_token) + "'", lineno);
		define(out_net, lineno);
		std::string_view args = rhs.substr(open + 1, rhs.size() - open - 2);

		std::vector<std::string> fanin;
		std::string_view remaining = strip(args);
		while (!remaining.empty()) {
			auto comma = remaining.find(',');
			std::string_view item = strip(comma == std::string_view::npos ? remaining : remaining.substr(0, comma));
			if (item.empty())
				throw NetlistError("empty fanin in gate '" + out_net + "'", lineno);
			fanin.emplace_back(item);
			if (comma == std::string_view::npos)
				break;
			remaining = strip(remaining.substr(comma + 1));
			if (remaining.empty())
				throw NetlistError("trailing comma in gate '" + out_net + "'", lineno);
		}

		auto [lo, hi] = gate_arity(*kind);
		if (fanin.size() < lo || fanin.size() > hi)
			throw NetlistError("gate '" + out_net + "': " + std::string(to_string(*kind)) + " expects " +
					   (lo == hi ? std::to_string(lo) : "at least " + std::to_string(lo)) +
					   " fanin(s), got " + std::to_string(fanin.size()), lineno);

		gates.push_back(Gate{std::move(out_net), *kind, std::move(fanin)});
		gate_lines.push_back(lineno);
	}

	for (std::size_t gi = 0; gi < gates.size(); ++gi)
		for (const auto &net : gates[gi].fanin)
			if (!def_line.count(net))
				throw NetlistError("undefined net '" + net + "' in fanin of gate '" + gates[gi].output + "'",
						   gate_lines[gi]);
	for (const auto &[port, at] : output_decls)
		if (!def_line.count(port))
			throw NetlistError("output port '" + port + "' has no driver", at);

	return Netlist(std::move(name), std::move(inputs), std::move(key_inputs), std::move(outputs), std::move(gates));
}

Netlist parse_bench(const std::string &text, std::string name, std::string_view key_prefix)
{
	std::istringstream in(text);
	return parse_bench(in, std::move(name), key_prefix);
}

Netlist parse_bench_file(const std::filesystem::path &path, std::string_view key_prefix)
{
	std::ifstream in(path);
	if (!in)
		throw NetlistError("cannot open '" + path.string() + "'");
	return parse_bench(in, path.stem().string(), key_prefix);
}

void write_bench(std::ostream &out, const Netlist &n)
{
	out << "# " << n.name() << "\n";
	for (const auto &p : n.inputs())
		out << "INPUT(" << p << ")\n";
	for (const auto &p : n.key_inputs())
		out << "INPUT(" << p << ")\n";
	for (const auto &p : n.outputs())
		out << "OUTPUT(" << p << ")\n";
	out << "\n";
	for (const auto &g : n.gates()) {
		out << g.output << " = " << to_string(g.kind) << "(";
		for (std::size_t i = 0; i < g.fanin.size(); ++i) {
			if (i)
				out << ", ";
			out << g.fanin[i];
		}
		out << ")\n";
	}
}

std::string write_bench(const Netlist &n)
{
	std::ostringstream out;
	write_bench(out, n);
	return out.str();
}

void write_bench_file(const std::filesystem::path &path, const Netlist &n)
{
	std::ofstream out(path);
	if (!out)
		throw NetlistError("cannot write '" + path.string() + "'");
	write_bench(out, n);
}

} // namespace splitlock
