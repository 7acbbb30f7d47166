"""Classical separate source/channel coding baselines."""
from .ldpc import LdpcCode, read_alist, write_alist
from .pipeline import ClassicalPipeline, PipelineResult, classical_pipeline
from .qam import analytic_ser, constellation, qam64_demodulate, qam64_llr, qam64_modulate
from .reed_solomon import rs_decode, rs_encode
from .source_codes import (
    ALPHABET,
    HuffmanCode,
    char_frequencies,
    fixed6_decode,
    fixed6_encode,
    huffman_build,
    huffman_decode,
    huffman_encode,
)
