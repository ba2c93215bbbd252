import pytest

from utils.integrity import IntegrityError, PipelineManifest, hash_bytes, hash_config
from utils.serialization import canonical_dumps, loads_jsonl
from utils.validators import ValidationError, validate_input, validate_record_fields


class TestValidateInput:
    @pytest.mark.parametrize('field_type, value, expected', [
        ('signal', ' ValveV201 ', 'ValveV201'),
        ('signal', 'tank_B201.level', 'tank_B201.level'),
        ('signal_value', 1, 1),
        ('timestamp', 0, 0),
        ('cycle_ms', '100', 100),
        ('policy', None, 'resync'),
        ('policy', 'HALT', 'halt'),
        ('state_ref', 'q12', 12),
        ('state_ref', '3', 3),
        ('vector', '0,1,0', (0, 1, 0)),
        ('vector', [1, 1], (1, 1)),
        ('iri', 'http://example.org/', 'http://example.org/'),
    ])
    def test_accepts(self, field_type, value, expected):
        assert validate_input(field_type, value) == expected

    @pytest.mark.parametrize('field_type, value', [
        ('signal', '1abc'),
        ('signal', ''),
        ('signal_value', True),
        ('signal_value', -1),
        ('timestamp', 1.5),
        ('timestamp', -10),
        ('cycle_ms', 0),
        ('cycle_ms', 60001),
        ('seed', 2 ** 32),
        ('policy', 'retry'),
        ('state_ref', 'state2'),
        ('vector', '0,x'),
        ('iri', 'example.org'),
    ])
    def test_rejects(self, field_type, value):
        with pytest.raises(ValidationError):
            validate_input(field_type, value)

    def test_unknown_field_type(self):
        with pytest.raises(ValidationError):
            validate_input('colour', 'red')

    def test_record_fields(self):
        record = validate_record_fields({'t_ms': 5, 'signal': 'V1', 'extra': 1}, {'t_ms': 'timestamp', 'signal': 'signal'},
                                        {'value': 'signal_value'})
        assert record == {'t_ms': 5, 'signal': 'V1'}
        with pytest.raises(ValidationError):
            validate_record_fields(['not', 'a', 'dict'], {'t_ms': 'timestamp'})


class TestSerialization:
    def test_canonical_key_order(self):
        assert canonical_dumps({'b': 1, 'a': [2, 3]}) == '{"a":[2,3],"b":1}'

    def test_jsonl_reports_line(self):
        with pytest.raises(ValidationError, match=':2:'):
            loads_jsonl('{"a": 1}\n{broken\n')

    def test_jsonl_skips_blank_lines(self):
        assert loads_jsonl('\n{"a": 1}\n\n') == [{'a': 1}]


class TestIntegrity:
    def test_config_hash_ignores_key_order(self):
        assert hash_config({'a': 1, 'b': 2}) == hash_config({'b': 2, 'a': 1})
        assert hash_config(None) is None

    def test_hash_bytes(self):
        assert hash_bytes(b'') == 'e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855'

    def test_manifest_round_trip(self, tmp_path):
        artifact = tmp_path / 'out' / 'log.jsonl'
        artifact.parent.mkdir()
        artifact.write_text('{}\n')

        manifest = PipelineManifest.load(str(tmp_path), '1.0.0')
        entry = manifest.record(str(artifact), 'simulate', seed=3)
        manifest.save()
        assert entry.path == 'out/log.jsonl'

        reloaded = PipelineManifest.load(str(tmp_path), '1.0.0')
        assert reloaded.to_dict() == manifest.to_dict()
        assert reloaded.verify()

    def test_missing_artifact(self, tmp_path):
        artifact = tmp_path / 'gone.json'
        artifact.write_text('{}')
        manifest = PipelineManifest.load(str(tmp_path), '1.0.0')
        manifest.record(str(artifact), 'learn')
        artifact.unlink()
        with pytest.raises(IntegrityError):
            manifest.verify()
