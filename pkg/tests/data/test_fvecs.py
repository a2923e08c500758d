import struct

import numpy as np
import pytest

from bqqkit.data.fvecs import parse_fvecs, write_fvecs
from bqqkit.errors import FormatError
from bqqkit.matrix import make_rng


class TestParseFvecs:
    """Test fvecs parsing."""

    def test_single_record(self):
        """Test one two-dimensional record."""
        data = struct.pack("<iff", 2, 1.0, 2.0)
        records = parse_fvecs(data)
        assert records.dim == 2  # noqa: PLR2004
        np.testing.assert_array_equal(records.as_matrix(), [[1.0, 2.0]])

    def test_empty(self):
        """Test an empty file gives an empty set without a dimension."""
        records = parse_fvecs(b"")
        assert records.empty
        assert records.dim is None

    def test_round_trip(self):
        """Test 100 random 128-dimensional vectors survive write and parse bit for bit."""
        vectors = make_rng(0).standard_normal((100, 128)).astype(np.float32)
        data = write_fvecs(vectors)
        assert len(data) == 100 * 4 * 129
        parsed = parse_fvecs(data)
        assert parsed.vectors.tobytes() == vectors.tobytes()
        assert write_fvecs(parsed.vectors) == data

    def test_inconsistent_dimension(self):
        """Test a record with another dimension is reported at its offset."""
        data = struct.pack("<iff", 2, 1.0, 2.0) + struct.pack("<iff", 3, 1.0, 2.0)
        with pytest.raises(FormatError, match="record 1") as excinfo:
            parse_fvecs(data)
        assert excinfo.value.offset == 12  # noqa: PLR2004

    def test_truncated(self):
        """Test trailing bytes are reported."""
        data = struct.pack("<iff", 2, 1.0, 2.0) + b"\x02\x00"
        with pytest.raises(FormatError, match="truncated") as excinfo:
            parse_fvecs(data)
        assert excinfo.value.offset == 12  # noqa: PLR2004
        assert "byte 12" in str(excinfo.value)

    def test_non_positive_dimension(self):
        """Test a zero dimension field."""
        with pytest.raises(FormatError, match="non-positive"):
            parse_fvecs(struct.pack("<i", 0))

    def test_write_rejects_bad_shape(self):
        """Test writing needs a 2-D array."""
        with pytest.raises(FormatError):
            write_fvecs(np.zeros(3))
