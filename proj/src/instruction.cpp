#include "mrfe/instruction.hpp"

#include "mrfe/errors.hpp"
#include "mrfe/text_util.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace mrfe::inline MRFE_PRECISION {

std::string domain_directive(const std::string& domain) {
    if (domain == "movie") return "This is a movie review.";
    if (domain == "restaurant") return "This is a restaurant review.";
    if (domain == "tweet") return "This is a tweet.";
    if (domain == "product") return "This is a product review.";
    return {};
}

std::string apply_instruction(std::string_view x, const std::optional<std::string>& context,
                              const InstructionTemplate& tmpl, const std::optional<std::string>& response,
                              const std::optional<std::string>& identifier) {
    if (trim(x).empty()) throw InputError("apply_instruction: review text is empty");

    const auto& r = response ? response : tmpl.response;
    const auto& i = identifier ? identifier : tmpl.identifier;
    const bool comment = (r && !r->empty()) || (i && !i->empty());

    std::vector<std::string> parts;
    if (!tmpl.prefix.empty()) parts.push_back(tmpl.prefix);
    if (context && !trim(*context).empty()) parts.push_back(trim(*context));
    if (comment) {
        parts.push_back("Review: \"" + std::string(x) + "\"");
        std::string c = "Comment:";
        const bool has_r = r && !r->empty();
        const bool has_i = i && !i->empty();
        if (has_r) c += " " + *r;
        if (has_i) {
            if (has_r) c += " " + tmpl.connector;
            c += " \"" + *i + "\" expresses strong sentiment.";
        } else {
            c += ".";
        }
        parts.push_back(std::move(c));
    } else {
        parts.push_back("Review: " + std::string(x));
    }
    return join(parts, " ");
}

const InstructionTemplate& TemplateRegistry::add(InstructionTemplate tmpl) {
    if (tmpl.pattern_id.empty()) throw RegistryError("template has an empty pattern_id");
    if (by_id_.count(tmpl.pattern_id)) throw RegistryError("duplicate template pattern_id '" + tmpl.pattern_id + "'");
    by_id_.emplace(tmpl.pattern_id, templates_.size());
    templates_.push_back(std::move(tmpl));
    return templates_.back();
}

const InstructionTemplate& TemplateRegistry::by_id(const std::string& pattern_id) const {
    auto it = by_id_.find(pattern_id);
    if (it == by_id_.end()) throw RegistryError("unknown template pattern_id '" + pattern_id + "'");
    return templates_[it->second];
}

std::vector<const InstructionTemplate*> TemplateRegistry::by_domain(const std::string& domain) const {
    std::vector<const InstructionTemplate*> out;
    for (const auto& t : templates_) {
        if (t.domain == domain) out.push_back(&t);
    }
    return out;
}

bool TemplateRegistry::contains(const std::string& pattern_id) const { return by_id_.count(pattern_id) != 0; }

TemplateRegistry TemplateRegistry::builtin() {
    TemplateRegistry reg;
    InstructionTemplate plain;
    plain.pattern_id = "plain";
    reg.add(plain);
    for (const char* domain : {"movie", "restaurant", "tweet", "product"}) {
        InstructionTemplate t;
        t.pattern_id = std::string(domain) + "-review";
        t.domain = domain;
        t.prefix = domain_directive(domain);
        reg.add(std::move(t));
    }
    return reg;
}

std::vector<InstructionTemplate> parse_templates(std::istream& in) {
    std::vector<InstructionTemplate> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError("template file line " + std::to_string(line_no) + ": expected key=value");
        }
        const auto key = trim(std::string_view(t).substr(0, eq));
        const auto value = trim(std::string_view(t).substr(eq + 1));
        if (key == "pattern_id") {
            out.emplace_back().pattern_id = value;
            continue;
        }
        if (out.empty()) {
            throw ParseError("template file line " + std::to_string(line_no) + ": '" + key +
                             "' before any pattern_id");
        }
        auto& tmpl = out.back();
        if (key == "domain") {
            tmpl.domain = value;
            if (tmpl.prefix.empty()) tmpl.prefix = domain_directive(value);
        } else if (key == "prefix") {
            tmpl.prefix = value;
        } else if (key == "connector") {
            tmpl.connector = value;
        } else {
            throw ParseError("template file line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    return out;
}

std::vector<InstructionTemplate> load_templates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open template file " + path.string());
    return parse_templates(in);
}

void write_templates(std::ostream& out, const std::vector<InstructionTemplate>& templates) {
    for (const auto& t : templates) {
        out << "pattern_id = " << t.pattern_id << '\n';
        out << "domain = " << t.domain << '\n';
        out << "prefix = " << t.prefix << '\n';
        out << "connector = " << t.connector << '\n';
    }
}

} // namespace mrfe
