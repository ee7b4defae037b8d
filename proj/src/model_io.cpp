#include "multisvm/model_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "multisvm/error.hpp"
#include "multisvm/file_util.hpp"

namespace multisvm {

namespace {

constexpr std::string_view kMagic = "multisvm-model v1";

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next `key: value` line, value returned; key must match.
    std::string expect(std::string_view key) {
        std::string line;
        if (!std::getline(in_, line)) fail("unexpected end of file, expected '" + std::string(key) + "'");
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto colon = line.find(':');
        if (colon == std::string::npos || std::string_view(line).substr(0, colon) != key) {
            fail("expected '" + std::string(key) + ":' but found '" + line + "'");
        }
        std::size_t start = colon + 1;
        while (start < line.size() && line[start] == ' ') ++start;
        return line.substr(start);
    }

    std::string raw_line() {
        std::string line;
        if (!std::getline(in_, line)) fail("unexpected end of file");
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError("model file line " + std::to_string(line_no_) + ": " + what);
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

template <typename T>
T parse_number(const LineReader& reader, std::string_view text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        reader.fail("cannot parse number '" + std::string(text) + "'");
    }
    return value;
}

std::vector<double> parse_reals(const LineReader& reader, std::string_view text) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && text[pos] == ' ') ++pos;
        if (pos >= text.size()) break;
        auto end = text.find(' ', pos);
        if (end == std::string_view::npos) end = text.size();
        values.push_back(parse_number<double>(reader, text.substr(pos, end - pos)));
        pos = end;
    }
    return values;
}

void write_reals(std::ostream& out, std::span<const double> values) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) out << ' ';
        out << format_real(values[k]);
    }
}

}  // namespace

std::string format_real(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
    return std::string(buffer, ptr);
}

void write_model(std::ostream& out, const MulticlassModel& model) {
    model.validate();
    out << kMagic << '\n';
    out << "strategy: " << to_string(model.strategy) << '\n';
    out << "voting: " << to_string(model.voting) << '\n';
    out << "classes: " << model.catalog.size() << '\n';
    for (const auto& entry : model.catalog.entries()) {
        out << "class: " << static_cast<int>(entry.code) << ' ' << entry.name << '\n';
    }
    out << "machines: " << model.machines.size() << '\n';
    for (const auto& m : model.machines) {
        out << "machine: " << static_cast<int>(m.positive_class) << ' ' << static_cast<int>(m.negative_class) << '\n';
        out << "kernel: " << to_string(m.kernel.kind) << '\n';
        out << "degree: " << m.kernel.degree << '\n';
        out << "offset: " << format_real(m.kernel.offset) << '\n';
        if (m.kernel.gamma) out << "gamma: " << format_real(*m.kernel.gamma) << '\n';
        out << "cost: " << format_real(m.cost) << '\n';
        out << "means: ";
        write_reals(out, m.scaling.means);
        out << "\nstddevs: ";
        write_reals(out, m.scaling.stddevs);
        out << "\nbias: " << format_real(m.bias) << '\n';
        out << "support_vectors: " << m.support_vectors.size() << '\n';
        for (std::size_t k = 0; k < m.support_vectors.size(); ++k) {
            out << "sv: " << format_real(m.dual_coefs[k]);
            for (double v : m.support_vectors[k]) out << ' ' << format_real(v);
            out << '\n';
        }
        out << "end\n";
    }
}

MulticlassModel read_model(std::istream& in) {
    LineReader reader(in);
    const std::string magic = reader.raw_line();
    if (magic != kMagic) {
        if (magic.rfind("multisvm-model", 0) == 0) reader.fail("unsupported model version '" + magic + "'");
        reader.fail("not a multisvm model file");
    }

    MulticlassModel model;
    try {
        model.strategy = parse_strategy(reader.expect("strategy"));
        model.voting = parse_voting(reader.expect("voting"));
    } catch (const InputError& e) {
        reader.fail(e.what());
    }
    const auto class_count = parse_number<std::size_t>(reader, reader.expect("classes"));
    std::vector<ClassEntry> entries;
    for (std::size_t k = 0; k < class_count; ++k) {
        const std::string value = reader.expect("class");
        const auto space = value.find(' ');
        if (space == std::string::npos) reader.fail("class line needs a code and a name");
        const int code = parse_number<int>(reader, std::string_view(value).substr(0, space));
        if (code < 0 || code > 255) reader.fail("class code out of range");
        entries.push_back({static_cast<ClassCode>(code), value.substr(space + 1)});
    }
    try {
        model.catalog = ClassCatalog(std::move(entries));
    } catch (const InputError& e) {
        reader.fail(e.what());
    }

    const auto machine_count = parse_number<std::size_t>(reader, reader.expect("machines"));
    for (std::size_t m = 0; m < machine_count; ++m) {
        BinarySvmModel machine;
        const std::string tags = reader.expect("machine");
        const auto space = tags.find(' ');
        if (space == std::string::npos) reader.fail("machine line needs two class codes");
        machine.positive_class =
            static_cast<ClassCode>(parse_number<int>(reader, std::string_view(tags).substr(0, space)));
        machine.negative_class =
            static_cast<ClassCode>(parse_number<int>(reader, std::string_view(tags).substr(space + 1)));
        try {
            machine.kernel.kind = parse_kernel_kind(reader.expect("kernel"));
        } catch (const InputError& e) {
            reader.fail(e.what());
        }
        // Kernel parameters are optional and default as in KernelSpec.
        std::string line = reader.raw_line();
        for (;;) {
            const auto colon = line.find(':');
            const std::string key = line.substr(0, colon);
            if (colon == std::string::npos || key == "cost") break;
            const auto start = line.find_first_not_of(' ', colon + 1);
            if (start == std::string::npos) reader.fail("empty value for '" + key + "'");
            const std::string_view value = std::string_view(line).substr(start);
            if (key == "degree") machine.kernel.degree = parse_number<int>(reader, value);
            else if (key == "offset") machine.kernel.offset = parse_number<double>(reader, value);
            else if (key == "gamma") machine.kernel.gamma = parse_number<double>(reader, value);
            else reader.fail("unexpected key '" + key + "' in kernel section");
            line = reader.raw_line();
        }
        if (machine.kernel.kind == KernelKind::Quadratic) machine.kernel.degree = 2;
        if (line.rfind("cost: ", 0) != 0) reader.fail("expected 'cost:' but found '" + line + "'");
        machine.cost = parse_number<double>(reader, std::string_view(line).substr(6));
        machine.scaling.means = parse_reals(reader, reader.expect("means"));
        machine.scaling.stddevs = parse_reals(reader, reader.expect("stddevs"));
        if (machine.scaling.means.size() != machine.scaling.stddevs.size() || machine.scaling.means.empty()) {
            reader.fail("means and stddevs must be nonempty and of equal length");
        }
        machine.bias = parse_number<double>(reader, reader.expect("bias"));
        const auto sv_count = parse_number<std::size_t>(reader, reader.expect("support_vectors"));
        if (sv_count == 0) reader.fail("a machine needs at least one support vector");
        for (std::size_t k = 0; k < sv_count; ++k) {
            std::vector<double> values = parse_reals(reader, reader.expect("sv"));
            if (values.size() != machine.scaling.dimensions() + 1) {
                reader.fail("support vector has " + std::to_string(values.size()) + " numbers, expected " +
                            std::to_string(machine.scaling.dimensions() + 1));
            }
            machine.dual_coefs.push_back(values.front());
            machine.support_vectors.emplace_back(values.begin() + 1, values.end());
        }
        if (reader.raw_line() != "end") reader.fail("expected 'end'");
        try {
            machine.kernel.validate();
        } catch (const InputError& e) {
            reader.fail(e.what());
        }
        model.machines.push_back(std::move(machine));
    }
    try {
        model.validate();
    } catch (const InputError& e) {
        reader.fail(e.what());
    }
    return model;
}

void save_model(const std::filesystem::path& path, const MulticlassModel& model) {
    std::ostringstream out;
    write_model(out, model);
    write_file_atomic(path, out.str());
}

MulticlassModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file " + path.string());
    return read_model(in);
}

}  // namespace multisvm
